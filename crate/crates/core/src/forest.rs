//! Random forest regression: bootstrap samples, per-node column sampling,
//! out-of-bag error and permutation importance.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cart::{self, GrowParams, RegressionTree, TreeConfig, TreeError};
use crate::dataset::{DatasetError, FeatureMatrix};
use crate::rng::{self, stream};
use crate::{exec, math};

#[derive(Debug, thiserror::Error)]
pub enum ForestError {
    #[error("invalid forest config: {0}")]
    InvalidConfig(String),
    #[error("no row is out of bag in any tree")]
    NoOobRows,
    #[error("response has zero variance over the out-of-bag rows")]
    ZeroVariance,
    #[error("response has {got} rows, forest was fit on {expected}")]
    ResponseLength { expected: usize, got: usize },
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    /// Columns sampled per node.
    pub m_try: usize,
    pub n_tree: usize,
    /// Leaf budget per tree.
    pub max_nodes: usize,
    pub min_leaf: usize,
    pub seed: u64,
    /// Draw a bootstrap sample per tree; off only for tests of the
    /// degenerate single-tree forest.
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            m_try: 5,
            n_tree: 250,
            max_nodes: 14,
            min_leaf: 5,
            seed: 0,
            bootstrap: true,
        }
    }
}

impl ForestConfig {
    /// Defaults for the forest used as a meta-learner over five base predictions.
    pub fn meta_default() -> Self {
        ForestConfig {
            m_try: 2,
            n_tree: 1000,
            max_nodes: 9,
            ..ForestConfig::default()
        }
    }

    pub fn validate(&self, n_cols: usize) -> Result<(), ForestError> {
        if self.m_try < 1 || self.m_try > n_cols {
            return Err(ForestError::InvalidConfig(format!(
                "m_try {} outside 1..={n_cols}",
                self.m_try
            )));
        }
        if self.n_tree < 1 {
            return Err(ForestError::InvalidConfig("n_tree must be at least 1".into()));
        }
        if self.max_nodes < 1 {
            return Err(ForestError::InvalidConfig("max_nodes must be at least 1".into()));
        }
        if self.min_leaf < 1 {
            return Err(ForestError::InvalidConfig("min_leaf must be at least 1".into()));
        }
        Ok(())
    }

    /// Stopping rules of each member tree, as a single-tree config.
    pub fn tree_config(&self) -> TreeConfig {
        TreeConfig {
            min_split: 2 * self.min_leaf,
            min_leaf: self.min_leaf,
            cp: 0.0,
            max_depth: None,
            max_leaves: Some(self.max_nodes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<RegressionTree>,
    /// Rows left out of each tree's bootstrap sample, ascending.
    pub oob_rows: Vec<Vec<u32>>,
    /// Mean OOB prediction per training row; `None` where no tree left it out.
    pub oob_predictions: Vec<Option<f64>>,
    pub oob_counts: Vec<usize>,
    pub config: ForestConfig,
    pub column_names: Vec<String>,
    /// Permutation importance, scaled so the largest is 100.
    pub importance: Vec<f64>,
    /// Mean total split gain per column and tree.
    pub impurity_importance: Vec<f64>,
}

impl RandomForest {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        math::fsum(self.trees.iter().map(|t| t.predict_row(row))) / self.trees.len() as f64
    }

    /// Fraction of (tree, row) pairs that are out of bag.
    pub fn oob_fraction(&self) -> f64 {
        let n = self.oob_predictions.len();
        let total: usize = self.oob_rows.iter().map(Vec::len).sum();
        total as f64 / (n * self.trees.len()) as f64
    }
}

fn fit_member(x: &FeatureMatrix, cfg: &ForestConfig, t: usize) -> (RegressionTree, Vec<u32>) {
    let n = x.n_rows();
    let p = x.n_cols();
    let mut rng = rng::stream_rng(cfg.seed, stream::FOREST_TREE + t as u64);
    let (rows, oob) = if cfg.bootstrap {
        let mut in_bag = vec![false; n];
        let rows: Vec<u32> = (0..n)
            .map(|_| {
                let r = rng.random_range(0..n);
                in_bag[r] = true;
                r as u32
            })
            .collect();
        let oob = (0..n as u32).filter(|&r| !in_bag[r as usize]).collect();
        (rows, oob)
    } else {
        (cart::all_rows(n), Vec::new())
    };
    let tree_cfg = cfg.tree_config();
    let params = GrowParams::from(&tree_cfg);
    let m_try = cfg.m_try;
    let root = cart::grow_rows(x, x.response(), &rows, &params, &mut || {
        rng::sample_without_replacement(&mut rng, p, m_try)
    });
    let tree = RegressionTree {
        root,
        column_names: x.column_names().to_vec(),
        config: tree_cfg,
    };
    (tree, oob)
}

/// Fit a forest on every row of `x`.
pub fn fit_forest(x: &FeatureMatrix, cfg: &ForestConfig) -> Result<RandomForest, ForestError> {
    cfg.validate(x.n_cols())?;
    if x.n_rows() == 0 {
        return Err(ForestError::Data(DatasetError::EmptyPanel));
    }
    let members = exec::map_indexed(cfg.n_tree, |t| fit_member(x, cfg, t));
    let (trees, oob_rows): (Vec<_>, Vec<_>) = members.into_iter().unzip();

    let n = x.n_rows();
    let mut sums = vec![0.0; n];
    let mut oob_counts = vec![0usize; n];
    for (tree, oob) in trees.iter().zip(&oob_rows) {
        for &r in oob {
            sums[r as usize] += tree.predict_row(x.row(r as usize));
            oob_counts[r as usize] += 1;
        }
    }
    let oob_predictions = sums
        .iter()
        .zip(&oob_counts)
        .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
        .collect();

    let p = x.n_cols();
    let mut impurity = vec![0.0; p];
    for tree in &trees {
        for (acc, g) in impurity.iter_mut().zip(tree.split_gains(p)) {
            *acc += g;
        }
    }
    for v in &mut impurity {
        *v /= trees.len() as f64;
    }

    let mut forest = RandomForest {
        trees,
        oob_rows,
        oob_predictions,
        oob_counts,
        config: *cfg,
        column_names: x.column_names().to_vec(),
        importance: Vec::new(),
        impurity_importance: impurity,
    };
    forest.importance = importance_forest(&forest, x, cfg.seed)?;
    Ok(forest)
}

fn oob_pairs<'a>(forest: &'a RandomForest, y: &'a [f64]) -> Result<Vec<(f64, f64)>, ForestError> {
    if y.len() != forest.oob_predictions.len() {
        return Err(ForestError::ResponseLength {
            expected: forest.oob_predictions.len(),
            got: y.len(),
        });
    }
    let pairs: Vec<(f64, f64)> = forest
        .oob_predictions
        .iter()
        .zip(y)
        .filter_map(|(p, &yi)| p.map(|p| (yi, p)))
        .collect();
    if pairs.is_empty() {
        return Err(ForestError::NoOobRows);
    }
    Ok(pairs)
}

/// Mean squared out-of-bag error over rows with OOB coverage.
pub fn oob_mse(forest: &RandomForest, y: &[f64]) -> Result<f64, ForestError> {
    let pairs = oob_pairs(forest, y)?;
    let sse: f64 = pairs.iter().map(|(yi, p)| (yi - p) * (yi - p)).sum();
    Ok(sse / pairs.len() as f64)
}

/// `1 − MSE_OOB / Var(y)`, variance taken over the OOB rows with divisor n.
pub fn oob_r2(forest: &RandomForest, y: &[f64]) -> Result<f64, ForestError> {
    let pairs = oob_pairs(forest, y)?;
    let ys: Vec<f64> = pairs.iter().map(|&(yi, _)| yi).collect();
    let var = math::sum_sq_dev(&ys) / ys.len() as f64;
    if !(var > 0.0) {
        return Err(ForestError::ZeroVariance);
    }
    Ok(1.0 - oob_mse(forest, y)? / var)
}

fn tree_oob_mse(tree: &RegressionTree, x: &FeatureMatrix, rows: &[u32], col: Option<(usize, &[f64])>) -> f64 {
    let y = x.response();
    let mut buf = vec![0.0; x.n_cols()];
    let mut sse = 0.0;
    for (k, &r) in rows.iter().enumerate() {
        buf.copy_from_slice(x.row(r as usize));
        if let Some((j, values)) = col {
            buf[j] = values[k];
        }
        let e = y[r as usize] - tree.predict_row(&buf);
        sse += e * e;
    }
    sse / rows.len() as f64
}

/// Permutation importance: mean over trees of the rise in OOB MSE when one
/// column is shuffled among that tree's OOB rows, floored at 0 and scaled so
/// the largest column is 100. `x` must be the training matrix.
pub fn importance_forest(forest: &RandomForest, x: &FeatureMatrix, seed: u64) -> Result<Vec<f64>, ForestError> {
    x.check_columns(&forest.column_names)?;
    let p = x.n_cols();
    let per_tree: Vec<Option<Vec<f64>>> = exec::map_indexed(forest.trees.len(), |t| {
        let rows = &forest.oob_rows[t];
        if rows.is_empty() {
            return None;
        }
        let tree = &forest.trees[t];
        let mut rng = rng::stream_rng(seed, stream::FOREST_IMPORTANCE + t as u64);
        let base = tree_oob_mse(tree, x, rows, None);
        Some(
            (0..p)
                .map(|j| {
                    let mut values: Vec<f64> = rows.iter().map(|&r| x.get(r as usize, j)).collect();
                    rng::shuffle(&mut rng, &mut values);
                    tree_oob_mse(tree, x, rows, Some((j, &values))) - base
                })
                .collect(),
        )
    });
    let mut totals = vec![0.0; p];
    let mut used = 0usize;
    for deltas in per_tree.into_iter().flatten() {
        used += 1;
        for (acc, d) in totals.iter_mut().zip(deltas) {
            *acc += d;
        }
    }
    if used > 0 {
        for v in &mut totals {
            *v = (*v / used as f64).max(0.0);
        }
    }
    Ok(scale_to_max(totals, 100.0))
}

pub(crate) fn scale_to_max(mut v: Vec<f64>, top: f64) -> Vec<f64> {
    let max = v.iter().copied().fold(0.0f64, f64::max);
    if max > 0.0 {
        for x in &mut v {
            *x = *x / max * top;
        }
    }
    v
}

/// Mean of the member trees' predictions for every row of `x`.
pub fn predict_forest(forest: &RandomForest, x: &FeatureMatrix) -> Result<Vec<f64>, ForestError> {
    x.check_columns(&forest.column_names)?;
    Ok((0..x.n_rows()).map(|i| forest.predict_row(x.row(i))).collect())
}

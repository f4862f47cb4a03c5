//! Gradient-boosted regression trees.
//!
//! Squared-error boosting refits each stage to the current residuals with a
//! best-first tree of `interaction_depth` splits; leaf values are residual
//! means and each stage enters the model scaled by the shrinkage rate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cart::{self, GrowParams, RegressionTree, TreeConfig};
use crate::dataset::{DatasetError, FeatureMatrix};
use crate::math;
use crate::rng::{self, stream};

#[derive(Debug, thiserror::Error)]
pub enum BoostError {
    #[error("invalid boosting config: {0}")]
    InvalidConfig(String),
    #[error("partial dependence grid is empty")]
    EmptyGrid,
    #[error("grid value {value} outside the observed range [{min}, {max}] of column {col}")]
    GridOutOfRange { col: usize, value: f64, min: f64, max: f64 },
    #[error("column index {0} out of range")]
    NoSuchColumn(usize),
    #[error("poisson loss needs a non-negative response with positive mean")]
    InvalidPoissonResponse,
    #[error(transparent)]
    Data(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoostLoss {
    #[default]
    SquaredError,
    /// Log-link Poisson deviance with Newton leaf values. Experimental.
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostConfig {
    pub n_trees: usize,
    pub shrinkage: f64,
    /// Splits per tree; `usize::MAX` leaves tree size unbounded.
    pub interaction_depth: usize,
    pub min_leaf: usize,
    /// Fraction of rows drawn without replacement for each stage.
    pub subsample: f64,
    pub seed: u64,
    pub loss: BoostLoss,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            n_trees: 100,
            shrinkage: 0.1,
            interaction_depth: 3,
            min_leaf: 10,
            subsample: 1.0,
            seed: 0,
            loss: BoostLoss::SquaredError,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<(), BoostError> {
        let bad = |m: String| Err(BoostError::InvalidConfig(m));
        if self.n_trees < 1 {
            return bad("n_trees must be at least 1".into());
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return bad(format!("shrinkage {} outside (0, 1]", self.shrinkage));
        }
        if self.interaction_depth < 1 {
            return bad("interaction_depth must be at least 1".into());
        }
        if self.min_leaf < 1 {
            return bad("min_leaf must be at least 1".into());
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad(format!("subsample {} outside (0, 1]", self.subsample));
        }
        Ok(())
    }

    fn tree_config(&self) -> TreeConfig {
        TreeConfig {
            min_split: 2 * self.min_leaf,
            min_leaf: self.min_leaf,
            cp: 0.0,
            max_depth: None,
            max_leaves: self.interaction_depth.checked_add(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    /// Response mean (log of it under Poisson loss).
    pub init: f64,
    pub trees: Vec<RegressionTree>,
    pub shrinkage: f64,
    pub loss: BoostLoss,
    pub column_names: Vec<String>,
    /// Relative importance in percent.
    pub importance: Vec<f64>,
    /// Training MSE after each stage.
    pub train_mse: Vec<f64>,
    pub config: BoostConfig,
}

impl BoostedModel {
    /// Raw score of the first `stages` trees, before any inverse link.
    fn score_row(&self, row: &[f64], stages: usize) -> f64 {
        let total: f64 = self.trees[..stages].iter().map(|t| t.predict_row(row)).sum();
        self.init + self.shrinkage * total
    }

    /// Prediction on the response scale from the first `stages` trees.
    pub fn predict_row_stages(&self, row: &[f64], stages: usize) -> f64 {
        let s = self.score_row(row, stages.min(self.trees.len()));
        match self.loss {
            BoostLoss::SquaredError => s,
            BoostLoss::Poisson => math::exp(s),
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.predict_row_stages(row, self.trees.len())
    }
}

/// Fit a boosted model on every row of `x`.
pub fn fit_gbm(x: &FeatureMatrix, cfg: &BoostConfig) -> Result<BoostedModel, BoostError> {
    cfg.validate()?;
    let n = x.n_rows();
    if n == 0 {
        return Err(BoostError::Data(DatasetError::EmptyPanel));
    }
    let y = x.response();
    let mean_y = math::mean(y);
    let init = match cfg.loss {
        BoostLoss::SquaredError => mean_y,
        BoostLoss::Poisson => {
            if y.iter().any(|&v| v < 0.0) || !(mean_y > 0.0) {
                return Err(BoostError::InvalidPoissonResponse);
            }
            math::ln(mean_y)
        }
    };
    let tree_cfg = cfg.tree_config();
    let params = GrowParams::from(&tree_cfg);
    let p = x.n_cols();
    let all_cols: Vec<usize> = (0..p).collect();
    let n_sample = ((cfg.subsample * n as f64) as usize).clamp(1, n);

    // Running sum of stage outputs; the score is init + shrinkage * sum.
    let mut stage_sum = vec![0.0; n];
    let mut score = vec![init; n];
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut train_mse = Vec::with_capacity(cfg.n_trees);
    for m in 0..cfg.n_trees {
        let rows: Vec<u32> = if n_sample == n {
            cart::all_rows(n)
        } else {
            let mut rng = rng::stream_rng(cfg.seed, stream::BOOST_STAGE + m as u64);
            rng::sample_without_replacement(&mut rng, n, n_sample)
                .into_iter()
                .map(|r| r as u32)
                .collect()
        };
        let fitted: Vec<f64> = score
            .iter()
            .map(|&s| match cfg.loss {
                BoostLoss::SquaredError => s,
                BoostLoss::Poisson => math::exp(s),
            })
            .collect();
        let residual: Vec<f64> = y.iter().zip(&fitted).map(|(yi, fi)| yi - fi).collect();
        let root = cart::grow_rows(x, &residual, &rows, &params, &mut || all_cols.clone());
        let mut tree = RegressionTree {
            root,
            column_names: x.column_names().to_vec(),
            config: tree_cfg,
        };
        if cfg.loss == BoostLoss::Poisson {
            let k = tree.n_leaves();
            let mut num = vec![0.0; k];
            let mut den = vec![0.0; k];
            for &r in &rows {
                let leaf = tree.leaf_index(x.row(r as usize));
                num[leaf] += residual[r as usize];
                den[leaf] += fitted[r as usize];
            }
            tree.map_leaves(|leaf, _| if den[leaf] > 0.0 { num[leaf] / den[leaf] } else { 0.0 });
        }
        for i in 0..n {
            stage_sum[i] += tree.predict_row(x.row(i));
            score[i] = init + cfg.shrinkage * stage_sum[i];
        }
        let sse: f64 = score
            .iter()
            .zip(y)
            .map(|(&s, &yi)| {
                let f = match cfg.loss {
                    BoostLoss::SquaredError => s,
                    BoostLoss::Poisson => math::exp(s),
                };
                (yi - f) * (yi - f)
            })
            .sum();
        train_mse.push(sse / n as f64);
        trees.push(tree);
    }

    let mut model = BoostedModel {
        init,
        trees,
        shrinkage: cfg.shrinkage,
        loss: cfg.loss,
        column_names: x.column_names().to_vec(),
        importance: Vec::new(),
        train_mse,
        config: *cfg,
    };
    model.importance = importance_gbm(&model);
    Ok(model)
}

/// Predictions for every row of `x`, floored at 0 when `clamp_nonneg`.
pub fn predict_gbm(model: &BoostedModel, x: &FeatureMatrix, clamp_nonneg: bool) -> Result<Vec<f64>, BoostError> {
    predict_gbm_stages(model, x, model.trees.len(), clamp_nonneg)
}

/// Predictions from the model truncated to its first `stages` trees.
pub fn predict_gbm_stages(
    model: &BoostedModel,
    x: &FeatureMatrix,
    stages: usize,
    clamp_nonneg: bool,
) -> Result<Vec<f64>, BoostError> {
    x.check_columns(&model.column_names)?;
    Ok((0..x.n_rows())
        .map(|i| {
            let v = model.predict_row_stages(x.row(i), stages);
            if clamp_nonneg {
                v.max(0.0)
            } else {
                v
            }
        })
        .collect())
}

/// Per-column share of total split gain over all trees, in percent.
pub fn importance_gbm(model: &BoostedModel) -> Vec<f64> {
    let p = model.column_names.len();
    let mut totals = vec![0.0; p];
    for tree in &model.trees {
        for (acc, g) in totals.iter_mut().zip(tree.split_gains(p)) {
            *acc += g;
        }
    }
    let sum: f64 = totals.iter().sum();
    if sum > 0.0 {
        for v in &mut totals {
            *v = 100.0 * *v / sum;
        }
    }
    totals
}

/// Average prediction over the rows of `x` with column `col` set to each
/// grid value. Output is sorted by grid value.
pub fn partial_dependence(
    model: &BoostedModel,
    col: usize,
    grid: &[f64],
    x: &FeatureMatrix,
) -> Result<Vec<(f64, f64)>, BoostError> {
    x.check_columns(&model.column_names)?;
    if grid.is_empty() {
        return Err(BoostError::EmptyGrid);
    }
    if col >= x.n_cols() {
        return Err(BoostError::NoSuchColumn(col));
    }
    let values = x.column(col);
    let (min, max) = math::min_max(&values);
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    if let Some(&value) = grid.iter().find(|&&v| !(v >= min && v <= max)) {
        return Err(BoostError::GridOutOfRange { col, value, min, max });
    }
    let mut buf = vec![0.0; x.n_cols()];
    Ok(grid
        .into_iter()
        .map(|v| {
            let mean = math::fsum((0..x.n_rows()).map(|i| {
                buf.copy_from_slice(x.row(i));
                buf[col] = v;
                model.predict_row(&buf)
            })) / x.n_rows() as f64;
            (v, mean)
        })
        .collect())
}

/// `count` evenly spaced values spanning the observed range of `col`.
pub fn pd_grid(x: &FeatureMatrix, col: usize, count: usize) -> Vec<f64> {
    let (min, max) = math::min_max(&x.column(col));
    if count <= 1 || min == max {
        return vec![min];
    }
    (0..count)
        .map(|k| {
            if k + 1 == count {
                max
            } else {
                min + (max - min) * k as f64 / (count - 1) as f64
            }
        })
        .collect()
}

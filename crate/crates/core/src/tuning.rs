//! Full-factorial grid search scored by k-fold cross-validation.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::boosting::{self, BoostConfig};
use crate::cart::{self, TreeConfig};
use crate::dataset::FeatureMatrix;
use crate::forest::{self, ForestConfig};
use crate::rng::{self, stream};
use crate::{exec, math};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TuneError {
    #[error("cannot cut {n} rows into {k} folds")]
    TooFewRows { n: usize, k: usize },
    #[error("folds must be at least 2, got {0}")]
    TooFewFolds(usize),
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("grid has no combinations")]
    EmptyGrid,
    #[error("unknown parameter {param:?} for {learner}")]
    UnknownParam { learner: &'static str, param: String },
    #[error("parameter {param} needs a whole non-negative value, got {value}")]
    NotWhole { param: String, value: f64 },
    #[error("every combination failed; first error: {0}")]
    AllFailed(String),
}

/// `k` disjoint held-out index sets covering `0..n`, sizes within one.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, TuneError> {
    kfold_stream(n, k, seed, 0)
}

fn kfold_stream(n: usize, k: usize, seed: u64, repeat: u64) -> Result<Vec<Vec<usize>>, TuneError> {
    if k < 2 {
        return Err(TuneError::TooFewFolds(k));
    }
    if k > n {
        return Err(TuneError::TooFewRows { n, k });
    }
    let mut rng = rng::stream_rng(seed, stream::KFOLD + repeat);
    Ok(rng::balanced_folds(&mut rng, n, k))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Rmse,
    R2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid {
    /// Parameter name and its candidate values, in search order.
    pub params: Vec<(String, Vec<f64>)>,
    pub metric: Metric,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            params: Vec::new(),
            metric: Metric::Rmse,
            folds: 10,
            repeats: 1,
            seed: 0,
        }
    }
}

impl Grid {
    /// Every combination, first parameter varying slowest.
    pub fn combinations(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = vec![Vec::new()];
        for (_, values) in &self.params {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut c = prefix.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        if self.params.is_empty() {
            Vec::new()
        } else {
            out
        }
    }
}

/// The learner being tuned and the config that grid values override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "base")]
pub enum Learner {
    Tree(TreeConfig),
    Forest(ForestConfig),
    Gbm(BoostConfig),
}

fn whole(param: &str, v: f64) -> Result<usize, TuneError> {
    if v >= 0.0 && v == math::floor(v) && v.is_finite() {
        Ok(v as usize)
    } else {
        Err(TuneError::NotWhole {
            param: param.to_string(),
            value: v,
        })
    }
}

impl Learner {
    pub fn name(&self) -> &'static str {
        match self {
            Learner::Tree(_) => "tree",
            Learner::Forest(_) => "forest",
            Learner::Gbm(_) => "gbm",
        }
    }

    /// The base config with `names[i] = values[i]` applied.
    pub fn with_params(&self, names: &[&str], values: &[f64]) -> Result<Learner, TuneError> {
        let mut out = self.clone();
        for (&name, &v) in names.iter().zip(values) {
            let unknown = || TuneError::UnknownParam {
                learner: self.name(),
                param: name.to_string(),
            };
            match &mut out {
                Learner::Tree(c) => match name {
                    "cp" => c.cp = v,
                    "min_leaf" => c.min_leaf = whole(name, v)?,
                    "min_split" => c.min_split = whole(name, v)?,
                    "max_depth" => c.max_depth = Some(whole(name, v)?),
                    "max_leaves" => c.max_leaves = Some(whole(name, v)?),
                    _ => return Err(unknown()),
                },
                Learner::Forest(c) => match name {
                    "m_try" => c.m_try = whole(name, v)?,
                    "n_tree" => c.n_tree = whole(name, v)?,
                    "max_nodes" => c.max_nodes = whole(name, v)?,
                    "min_leaf" => c.min_leaf = whole(name, v)?,
                    _ => return Err(unknown()),
                },
                Learner::Gbm(c) => match name {
                    "shrinkage" => c.shrinkage = v,
                    "interaction_depth" => c.interaction_depth = whole(name, v)?,
                    "n_trees" => c.n_trees = whole(name, v)?,
                    "min_leaf" => c.min_leaf = whole(name, v)?,
                    "subsample" => c.subsample = v,
                    _ => return Err(unknown()),
                },
            }
        }
        Ok(out)
    }

    /// Fit on `train` and predict `test`.
    pub fn fit_predict(&self, train: &FeatureMatrix, test: &FeatureMatrix) -> Result<Vec<f64>, String> {
        match self {
            Learner::Tree(c) => {
                c.validate().map_err(|e| e.to_string())?;
                let t = cart::grow_tree(train, c);
                cart::predict_tree(&t, test).map_err(|e| e.to_string())
            }
            Learner::Forest(c) => {
                let f = forest::fit_forest(train, c).map_err(|e| e.to_string())?;
                forest::predict_forest(&f, test).map_err(|e| e.to_string())
            }
            Learner::Gbm(c) => {
                let m = boosting::fit_gbm(train, c).map_err(|e| e.to_string())?;
                boosting::predict_gbm(&m, test, false).map_err(|e| e.to_string())
            }
        }
    }

    /// Keys for breaking ties: (trees, depth, −shrinkage).
    fn simplicity(&self) -> (f64, f64, f64) {
        match self {
            Learner::Tree(c) => (1.0, c.max_leaves.or(c.max_depth).map_or(f64::INFINITY, |v| v as f64), -c.cp),
            Learner::Forest(c) => (c.n_tree as f64, c.max_nodes as f64, 0.0),
            Learner::Gbm(c) => (c.n_trees as f64, c.interaction_depth as f64, -c.shrinkage),
        }
    }
}

/// RMSE and R² over the held-out `rows` only.
pub fn holdout_scores(pred: &[f64], y: &[f64], rows: &[usize]) -> (f64, f64) {
    let obs: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    let sse = math::fsum(rows.iter().zip(pred).map(|(&i, p)| (y[i] - p) * (y[i] - p)));
    let sst = math::sum_sq_dev(&obs);
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { f64::NAN };
    (math::sqrt(sse / rows.len() as f64), r2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub values: Vec<f64>,
    pub rmse_mean: f64,
    pub rmse_se: f64,
    pub r2_mean: f64,
    pub r2_se: f64,
    /// 1 for the winner; `None` when disqualified.
    pub rank: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub learner: String,
    pub param_names: Vec<String>,
    pub metric: Metric,
    pub folds: usize,
    pub repeats: usize,
    pub rows: Vec<CvRow>,
    /// Index into `rows`.
    pub winner: usize,
}

impl CvResult {
    pub fn winner_row(&self) -> &CvRow {
        &self.rows[self.winner]
    }

    /// For each parameter, the metric along that parameter with every other
    /// parameter held at the winner's value.
    pub fn marginal_curves(&self) -> Vec<MarginalCurve> {
        let win = &self.rows[self.winner].values;
        (0..self.param_names.len())
            .map(|j| {
                let mut points: Vec<(f64, f64)> = self
                    .rows
                    .iter()
                    .filter(|r| r.error.is_none())
                    .filter(|r| r.values.iter().zip(win).enumerate().all(|(i, (a, b))| i == j || a == b))
                    .map(|r| {
                        let m = match self.metric {
                            Metric::Rmse => r.rmse_mean,
                            Metric::R2 => r.r2_mean,
                        };
                        (r.values[j], m)
                    })
                    .collect();
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                MarginalCurve {
                    param: self.param_names[j].clone(),
                    points,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalCurve {
    pub param: String,
    pub points: Vec<(f64, f64)>,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    (math::mean(v), math::sample_sd(v) / math::sqrt(v.len() as f64))
}

/// Grid search over `grid` for `learner` on the training matrix `x`.
pub fn grid_search(x: &FeatureMatrix, learner: &Learner, grid: &Grid) -> Result<CvResult, TuneError> {
    if grid.repeats < 1 {
        return Err(TuneError::NoRepeats);
    }
    let folds: Vec<Vec<Vec<usize>>> = (0..grid.repeats)
        .map(|r| kfold_stream(x.n_rows(), grid.folds, grid.seed, r as u64))
        .collect::<Result<_, _>>()?;
    grid_search_with_folds(x, learner, grid, &folds)
}

/// Grid search with explicit held-out sets, one partition per repeat.
pub fn grid_search_with_folds(
    x: &FeatureMatrix,
    learner: &Learner,
    grid: &Grid,
    partitions: &[Vec<Vec<usize>>],
) -> Result<CvResult, TuneError> {
    let combos = grid.combinations();
    if combos.is_empty() {
        return Err(TuneError::EmptyGrid);
    }
    let names: Vec<&str> = grid.params.iter().map(|(n, _)| n.as_str()).collect();
    let configs: Vec<Result<Learner, TuneError>> =
        combos.iter().map(|c| learner.with_params(&names, c)).collect();
    if let Some(Err(e)) = configs.iter().find(|c| matches!(c, Err(TuneError::UnknownParam { .. }))) {
        return Err(e.clone());
    }

    let tasks: Vec<(usize, usize, usize)> = (0..combos.len())
        .flat_map(|c| {
            partitions
                .iter()
                .enumerate()
                .flat_map(move |(r, p)| (0..p.len()).map(move |f| (c, r, f)))
        })
        .collect();
    let y = x.response();
    let n = x.n_rows();
    let scores: Vec<Result<(f64, f64), String>> = exec::map_indexed(tasks.len(), |t| {
        let (c, r, f) = tasks[t];
        let cfg = configs[c].as_ref().map_err(|e| e.to_string())?;
        let held = &partitions[r][f];
        let mut in_fold = vec![true; n];
        for &i in held {
            in_fold[i] = false;
        }
        let train_rows: Vec<usize> = (0..n).filter(|&i| in_fold[i]).collect();
        let pred = cfg.fit_predict(&x.select_rows(&train_rows), &x.select_rows(held))?;
        Ok(holdout_scores(&pred, y, held))
    });

    let per_combo = scores.len() / combos.len();
    let mut rows: Vec<CvRow> = combos
        .iter()
        .zip(scores.chunks(per_combo))
        .map(|(values, chunk)| {
            let failure = chunk.iter().find_map(|s| s.as_ref().err()).cloned();
            if let Some(error) = failure {
                return CvRow {
                    values: values.clone(),
                    rmse_mean: f64::NAN,
                    rmse_se: f64::NAN,
                    r2_mean: f64::NAN,
                    r2_se: f64::NAN,
                    rank: None,
                    error: Some(error),
                };
            }
            let rmse: Vec<f64> = chunk.iter().map(|s| s.as_ref().unwrap().0).collect();
            let r2: Vec<f64> = chunk.iter().map(|s| s.as_ref().unwrap().1).collect();
            let (rmse_mean, rmse_se) = mean_se(&rmse);
            let (r2_mean, r2_se) = mean_se(&r2);
            CvRow {
                values: values.clone(),
                rmse_mean,
                rmse_se,
                r2_mean,
                r2_se,
                rank: None,
                error: None,
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].error.is_none()).collect();
    if order.is_empty() {
        let first = rows[0].error.clone().unwrap_or_default();
        return Err(TuneError::AllFailed(first));
    }
    let key = |i: usize| match grid.metric {
        Metric::Rmse => rows[i].rmse_mean,
        Metric::R2 => -rows[i].r2_mean,
    };
    let simple: Vec<(f64, f64, f64)> = configs
        .iter()
        .map(|c| c.as_ref().map_or((0.0, 0.0, 0.0), Learner::simplicity))
        .collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        let tied = (ka - kb).abs() <= 1e-12 * ka.abs().max(kb.abs());
        if tied {
            simple[a]
                .0
                .total_cmp(&simple[b].0)
                .then(simple[a].1.total_cmp(&simple[b].1))
                .then(simple[a].2.total_cmp(&simple[b].2))
                .then(a.cmp(&b))
        } else {
            ka.total_cmp(&kb)
        }
    });
    for (rank, &i) in order.iter().enumerate() {
        rows[i].rank = Some(rank + 1);
    }
    Ok(CvResult {
        learner: learner.name().to_string(),
        param_names: names.iter().map(|s| s.to_string()).collect(),
        metric: grid.metric,
        folds: partitions.first().map_or(0, Vec::len),
        repeats: partitions.len(),
        winner: order[0],
        rows,
    })
}

/// The winning combination applied to the base learner config.
pub fn winner_learner(result: &CvResult, base: &Learner) -> Result<Learner, TuneError> {
    let names: Vec<&str> = result.param_names.iter().map(String::as_str).collect();
    base.with_params(&names, &result.winner_row().values)
}

/// Grids mirroring the published search ranges.
pub fn default_grid(learner: &Learner) -> Vec<(String, Vec<f64>)> {
    let p = |name: &str, v: &[f64]| (name.to_string(), v.to_vec());
    match learner {
        Learner::Gbm(_) => vec![
            p("shrinkage", &[0.1, 0.5, 1.0]),
            p("interaction_depth", &[1.0, 3.0, 7.0, 10.0]),
            p("n_trees", &[100.0, 300.0, 500.0, 1000.0]),
        ],
        Learner::Forest(_) => vec![
            p("m_try", &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]),
            p("n_tree", &[250.0, 500.0, 1000.0]),
            p("max_nodes", &[5.0, 9.0, 14.0, 20.0]),
        ],
        Learner::Tree(_) => vec![p("cp", &[0.0, 0.005, 0.01, 0.02, 0.05])],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn additive(seed: u64, n: usize) -> FeatureMatrix {
        let mut rng = rng::stream_rng(seed, 5);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()]).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 2.0 * r[0] + r[1] + 2.0 * (rng.random::<f64>() - 0.5))
            .collect();
        FeatureMatrix::from_rows(vec!["a".into(), "b".into(), "c".into()], &rows, y).unwrap()
    }

    #[test]
    fn kfold_examples() {
        let f = kfold_split(10, 10, 1).unwrap();
        assert!(f.iter().all(|s| s.len() == 1));
        let mut sizes: Vec<usize> = kfold_split(10, 3, 1).unwrap().iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);
        assert_eq!(kfold_split(3, 4, 0), Err(TuneError::TooFewRows { n: 3, k: 4 }));
        assert_eq!(kfold_split(3, 1, 0), Err(TuneError::TooFewFolds(1)));
        assert_eq!(kfold_split(50, 7, 9).unwrap(), kfold_split(50, 7, 9).unwrap());
    }

    proptest! {
        #[test]
        fn kfold_partitions(n in 2usize..200, k in 2usize..12, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let folds = kfold_split(n, k, seed).unwrap();
            prop_assert_eq!(folds.len(), k);
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let lo = folds.iter().map(Vec::len).min().unwrap();
            let hi = folds.iter().map(Vec::len).max().unwrap();
            prop_assert!(hi - lo <= 1);
        }
    }

    #[test]
    fn grid_combinations_are_factorial() {
        let g = Grid {
            params: vec![("a".into(), vec![1.0, 2.0]), ("b".into(), vec![3.0, 4.0, 5.0])],
            ..Grid::default()
        };
        let c = g.combinations();
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![1.0, 3.0]);
        assert_eq!(c[5], vec![2.0, 5.0]);
        assert!(Grid::default().combinations().is_empty());
    }

    #[test]
    fn single_combination_wins() {
        let x = additive(1, 60);
        let grid = Grid {
            params: vec![("n_trees".into(), vec![20.0])],
            folds: 3,
            ..Grid::default()
        };
        let r = grid_search(&x, &Learner::Gbm(BoostConfig::default()), &grid).unwrap();
        assert_eq!(r.winner, 0);
        assert_eq!(r.rows[0].rank, Some(1));
        assert!(r.rows[0].rmse_mean > 0.0);
    }

    #[test]
    fn stumps_beat_deep_trees_on_additive_truth() {
        let x = additive(2, 120);
        let grid = Grid {
            params: vec![("interaction_depth".into(), vec![1.0, 10.0])],
            folds: 5,
            seed: 3,
            ..Grid::default()
        };
        let base = Learner::Gbm(BoostConfig { n_trees: 150, min_leaf: 3, shrinkage: 0.1, ..BoostConfig::default() });
        let r = grid_search(&x, &base, &grid).unwrap();
        assert_eq!(r.winner_row().values, vec![1.0]);
        assert!(r.rows[0].rmse_mean < r.rows[1].rmse_mean);
    }

    #[test]
    fn ties_prefer_simpler_models() {
        // Constant response: every combination scores identically.
        let x = additive(3, 40).with_response(vec![2.0; 40]).unwrap();
        let grid = Grid {
            params: vec![
                ("n_trees".into(), vec![30.0, 10.0]),
                ("interaction_depth".into(), vec![3.0, 1.0]),
                ("shrinkage".into(), vec![0.1, 0.5]),
            ],
            folds: 4,
            ..Grid::default()
        };
        let r = grid_search(&x, &Learner::Gbm(BoostConfig::default()), &grid).unwrap();
        assert_eq!(r.winner_row().values, vec![10.0, 1.0, 0.5]);
    }

    #[test]
    fn failures_disqualify_only_their_combination() {
        let x = additive(4, 40);
        let grid = Grid {
            params: vec![("m_try".into(), vec![2.0, 9.0])],
            folds: 3,
            ..Grid::default()
        };
        let base = Learner::Forest(ForestConfig { n_tree: 10, ..ForestConfig::default() });
        let r = grid_search(&x, &base, &grid).unwrap();
        assert_eq!(r.winner, 0);
        assert!(r.rows[1].error.is_some() && r.rows[1].rank.is_none());
        let bad = Grid { params: vec![("m_try".into(), vec![9.0])], ..grid.clone() };
        assert!(matches!(grid_search(&x, &base, &bad), Err(TuneError::AllFailed(_))));
        let unknown = Grid { params: vec![("depth".into(), vec![1.0])], ..grid };
        assert!(matches!(grid_search(&x, &base, &unknown), Err(TuneError::UnknownParam { .. })));
    }

    #[test]
    fn results_are_reproducible_and_r2_ranks() {
        let x = additive(5, 80);
        let grid = Grid {
            params: vec![("cp".into(), vec![0.0, 0.01, 0.1])],
            folds: 4,
            metric: Metric::R2,
            seed: 11,
            ..Grid::default()
        };
        let base = Learner::Tree(TreeConfig::default());
        let a = grid_search(&x, &base, &grid).unwrap();
        assert_eq!(a, grid_search(&x, &base, &grid).unwrap());
        let best = a.rows.iter().map(|r| r.r2_mean).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(a.winner_row().r2_mean, best);
    }

    #[test]
    fn holdout_scores_ignore_in_fold_rows() {
        let y = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let held = [1, 3];
        let pred = [2.5, 3.5];
        let before = holdout_scores(&pred, &y, &held);
        let mut poisoned = y.clone();
        poisoned[0] = 1e6;
        poisoned[2] = -1e6;
        poisoned[4] = f64::NAN;
        assert_eq!(before, holdout_scores(&pred, &poisoned, &held));
        assert_eq!(before.0, 0.5);
    }

    #[test]
    fn row_permutation_with_matching_folds_keeps_results() {
        let x = additive(6, 60);
        let n = x.n_rows();
        let folds = kfold_split(n, 4, 2).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        rng::shuffle(&mut rng::stream_rng(8, 0), &mut perm);
        let permuted = x.select_rows(&perm);
        let mut position = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            position[old] = new;
        }
        let mapped: Vec<Vec<usize>> = folds
            .iter()
            .map(|f| {
                let mut v: Vec<usize> = f.iter().map(|&i| position[i]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let grid = Grid {
            params: vec![("interaction_depth".into(), vec![1.0, 2.0])],
            ..Grid::default()
        };
        let base = Learner::Gbm(BoostConfig { n_trees: 20, min_leaf: 3, ..BoostConfig::default() });
        let a = grid_search_with_folds(&x, &base, &grid, &[folds]).unwrap();
        let b = grid_search_with_folds(&permuted, &base, &grid, &[mapped]).unwrap();
        assert_eq!(a.winner, b.winner);
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert!((ra.rmse_mean - rb.rmse_mean).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_curves_pass_through_winner() {
        let x = additive(7, 60);
        let grid = Grid {
            params: vec![("n_trees".into(), vec![10.0, 40.0]), ("interaction_depth".into(), vec![1.0, 2.0, 3.0])],
            folds: 3,
            ..Grid::default()
        };
        let r = grid_search(&x, &Learner::Gbm(BoostConfig { min_leaf: 3, ..BoostConfig::default() }), &grid).unwrap();
        let curves = r.marginal_curves();
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[0].points.len(), 2);
        assert_eq!(curves[1].points.len(), 3);
        let w = r.winner_row();
        assert!(curves[1].points.contains(&(w.values[1], w.rmse_mean)));
        let tuned = winner_learner(&r, &Learner::Gbm(BoostConfig::default())).unwrap();
        if let Learner::Gbm(c) = tuned {
            assert_eq!(c.n_trees as f64, w.values[0]);
        } else {
            panic!("learner kind changed");
        }
    }

    #[test]
    fn repeats_multiply_fold_count() {
        let x = additive(8, 50);
        let grid = Grid {
            params: vec![("cp".into(), vec![0.01])],
            folds: 5,
            repeats: 3,
            ..Grid::default()
        };
        let r = grid_search(&x, &Learner::Tree(TreeConfig::default()), &grid).unwrap();
        assert_eq!((r.folds, r.repeats), (5, 3));
        assert!(r.rows[0].rmse_se > 0.0);
        assert_eq!(default_grid(&Learner::Gbm(BoostConfig::default())).len(), 3);
    }
}

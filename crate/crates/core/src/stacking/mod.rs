//! Heterogeneous stacking: five base learners fit on the training period, a
//! meta-learner fit on their validation-period predictions, and a final
//! out-of-sample score on the testing period.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::boosting::{fit_gbm, predict_gbm, BoostConfig, BoostedModel};
use crate::cart::{grow_tree, predict_tree, prune_one_se, CpRow, RegressionTree, TreeConfig};
use crate::dataset::{build_features, Covariate, DatasetError, FeatureMatrix, SegmentPanel, SplitMatrices, SplitSpec};
use crate::eval::{EvalError, MetricsReport, ModelRole, Scored};
use crate::forest::{fit_forest, oob_mse, predict_forest, ForestConfig, RandomForest};
use crate::glm::{fit_negbin, fit_poisson, predict_mean, FittedGlm, GlmSpec};

mod linear;
#[cfg(test)]
mod tests;

pub use linear::{fit_linear_stack, ConstraintMode, LinearStackWeights};

#[derive(Debug, thiserror::Error)]
pub enum StackError {
    #[error("{stage}: {message}")]
    Stage { stage: String, message: String },
    #[error("degenerate meta features: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn stage<E: core::fmt::Display>(name: &str) -> impl FnOnce(E) -> StackError + '_ {
    move |e| StackError::Stage {
        stage: name.to_string(),
        message: e.to_string(),
    }
}

/// Meta-feature column names, in the fixed learner order.
pub const META_COLUMNS: [&str; 5] = ["p1_poisson", "p2_negbin", "p3_tree", "p4_forest", "p5_gbm"];

/// Report names of the five base learners, same order as [`META_COLUMNS`].
pub const BASE_NAMES: [&str; 5] = ["poisson", "negbin", "tree", "forest", "gbm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaseConfigs {
    pub poisson: GlmSpec,
    pub negbin: GlmSpec,
    pub tree: TreeConfig,
    /// Cross-validation folds for one-SE pruning; 0 keeps the grown tree.
    pub prune_folds: usize,
    pub prune_seed: u64,
    pub forest: ForestConfig,
    pub gbm: BoostConfig,
}

impl Default for BaseConfigs {
    fn default() -> Self {
        BaseConfigs {
            poisson: GlmSpec::poisson(),
            negbin: GlmSpec::negbin(),
            tree: TreeConfig::default(),
            prune_folds: 10,
            prune_seed: 0,
            forest: ForestConfig::default(),
            gbm: BoostConfig::default(),
        }
    }
}

/// In-sample diagnostics recorded while training the base learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseDiagnostics {
    pub poisson_loglik: f64,
    pub negbin_loglik: f64,
    pub negbin_alpha: Option<f64>,
    pub tree_train_mse: f64,
    pub tree_leaves: usize,
    /// `None` when some row was never out of bag.
    pub forest_oob_mse: Option<f64>,
    pub gbm_train_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseLearnerSet {
    pub column_names: Vec<String>,
    pub log_columns: Vec<String>,
    pub poisson: FittedGlm,
    pub negbin: FittedGlm,
    pub tree: RegressionTree,
    /// Pruning table of the tree; empty when pruning was off.
    pub tree_cp_table: Vec<CpRow>,
    pub forest: RandomForest,
    pub gbm: BoostedModel,
    pub diagnostics: BaseDiagnostics,
}

fn train_mse(pred: &[f64], y: &[f64]) -> f64 {
    crate::math::fsum(pred.iter().zip(y).map(|(p, o)| (p - o) * (p - o))) / y.len().max(1) as f64
}

/// Fit all five base learners on the same training matrix.
pub fn train_base_learners(train: &FeatureMatrix, cfgs: &BaseConfigs) -> Result<BaseLearnerSet, StackError> {
    let poisson = fit_poisson(train, &cfgs.poisson).map_err(stage("poisson"))?;
    let negbin = fit_negbin(train, &cfgs.negbin).map_err(stage("negbin"))?;
    cfgs.tree.validate().map_err(stage("tree"))?;
    let grown = grow_tree(train, &cfgs.tree);
    let (tree, tree_cp_table) = if cfgs.prune_folds > 0 {
        let pruned = prune_one_se(&grown, train, cfgs.prune_folds, cfgs.prune_seed).map_err(stage("tree"))?;
        (pruned.tree, pruned.table)
    } else {
        (grown, Vec::new())
    };
    let forest = fit_forest(train, &cfgs.forest).map_err(stage("forest"))?;
    let gbm = fit_gbm(train, &cfgs.gbm).map_err(stage("gbm"))?;
    let y = train.response();
    let tree_pred = predict_tree(&tree, train).map_err(stage("tree"))?;
    let diagnostics = BaseDiagnostics {
        poisson_loglik: poisson.loglik,
        negbin_loglik: negbin.loglik,
        negbin_alpha: negbin.alpha,
        tree_train_mse: train_mse(&tree_pred, y),
        tree_leaves: tree.n_leaves(),
        forest_oob_mse: oob_mse(&forest, y).ok(),
        gbm_train_mse: gbm.train_mse.last().copied().unwrap_or_else(|| {
            let c = crate::math::mean(y);
            train_mse(&vec![c; y.len()], y)
        }),
    };
    Ok(BaseLearnerSet {
        column_names: train.column_names().to_vec(),
        log_columns: train.log_columns().to_vec(),
        poisson,
        negbin,
        tree,
        tree_cp_table,
        forest,
        gbm,
        diagnostics,
    })
}

impl BaseLearnerSet {
    /// Predictions of each learner on `x`, in [`BASE_NAMES`] order. GBM
    /// output is raw (may be negative) unless `clamp_nonneg`.
    pub fn predict_all(&self, x: &FeatureMatrix, clamp_nonneg: bool) -> Result<[Vec<f64>; 5], StackError> {
        x.check_columns(&self.column_names)?;
        if x.log_columns() != self.log_columns.as_slice() {
            return Err(DatasetError::ColumnMismatch {
                expected: self.log_columns.clone(),
                found: x.log_columns().to_vec(),
            }
            .into());
        }
        Ok([
            predict_mean(&self.poisson, x).map_err(stage("poisson"))?,
            predict_mean(&self.negbin, x).map_err(stage("negbin"))?,
            predict_tree(&self.tree, x).map_err(stage("tree"))?,
            predict_forest(&self.forest, x).map_err(stage("forest"))?,
            predict_gbm(&self.gbm, x, clamp_nonneg).map_err(stage("gbm"))?,
        ])
    }
}

/// The meta-learner's design: one column per base learner, with the
/// period's observed response attached.
pub fn meta_features(base: &BaseLearnerSet, x: &FeatureMatrix) -> Result<FeatureMatrix, StackError> {
    let preds = base.predict_all(x, false)?;
    let n = x.n_rows();
    let mut data = Vec::with_capacity(n * preds.len());
    for i in 0..n {
        data.extend(preds.iter().map(|p| p[i]));
    }
    let names = META_COLUMNS.iter().map(|s| s.to_string()).collect();
    Ok(FeatureMatrix::from_flat(names, data, x.response().to_vec())?.with_row_ids(x.row_ids().to_vec())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetaKind {
    Linear,
    Tree,
    Forest,
    Gbm,
}

impl MetaKind {
    pub const ALL: [MetaKind; 4] = [MetaKind::Linear, MetaKind::Tree, MetaKind::Forest, MetaKind::Gbm];
    /// The three tree-based meta-learners.
    pub const TREES: [MetaKind; 3] = [MetaKind::Tree, MetaKind::Forest, MetaKind::Gbm];

    pub fn from_name(name: &str) -> Option<MetaKind> {
        MetaKind::ALL.into_iter().find(|k| k.as_str() == name)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetaKind::Linear => "linear",
            MetaKind::Tree => "tree",
            MetaKind::Forest => "forest",
            MetaKind::Gbm => "gbm",
        }
    }

    /// Model name used in reports, e.g. `meta_forest`.
    pub fn model_name(self) -> String {
        format!("meta_{}", self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetaConfigs {
    pub linear_mode: ConstraintMode,
    pub linear_intercept: bool,
    pub tree: TreeConfig,
    pub prune_folds: usize,
    pub prune_seed: u64,
    pub forest: ForestConfig,
    pub gbm: BoostConfig,
}

impl Default for MetaConfigs {
    fn default() -> Self {
        MetaConfigs {
            linear_mode: ConstraintMode::Nonneg,
            linear_intercept: false,
            tree: TreeConfig::default(),
            prune_folds: 10,
            prune_seed: 0,
            forest: ForestConfig::meta_default(),
            gbm: BoostConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum MetaModel {
    Linear(LinearStackWeights),
    Tree(RegressionTree),
    Forest(RandomForest),
    Gbm(BoostedModel),
}

impl MetaModel {
    pub fn kind(&self) -> MetaKind {
        match self {
            MetaModel::Linear(_) => MetaKind::Linear,
            MetaModel::Tree(_) => MetaKind::Tree,
            MetaModel::Forest(_) => MetaKind::Forest,
            MetaModel::Gbm(_) => MetaKind::Gbm,
        }
    }

    /// Per meta-column weight: |w| for the linear stack, total split gain for
    /// a tree, permutation importance for a forest, percent gain for GBM.
    pub fn importance(&self) -> Vec<f64> {
        match self {
            MetaModel::Linear(w) => w.w.iter().map(|v| v.abs()).collect(),
            MetaModel::Tree(t) => t.split_gains(META_COLUMNS.len()),
            MetaModel::Forest(f) => f.importance.clone(),
            MetaModel::Gbm(g) => g.importance.clone(),
        }
    }

    /// Raw meta predictions on a meta-feature matrix.
    pub fn predict(&self, meta: &FeatureMatrix) -> Result<Vec<f64>, StackError> {
        let names: Vec<String> = META_COLUMNS.iter().map(|s| s.to_string()).collect();
        meta.check_columns(&names)?;
        match self {
            MetaModel::Linear(w) => Ok((0..meta.n_rows()).map(|i| w.predict_row(meta.row(i))).collect()),
            MetaModel::Tree(t) => predict_tree(t, meta).map_err(stage("meta tree")),
            MetaModel::Forest(f) => predict_forest(f, meta).map_err(stage("meta forest")),
            MetaModel::Gbm(g) => predict_gbm(g, meta, false).map_err(stage("meta gbm")),
        }
    }
}

pub fn fit_meta_learner(meta: &FeatureMatrix, kind: MetaKind, cfg: &MetaConfigs) -> Result<MetaModel, StackError> {
    let names: Vec<String> = META_COLUMNS.iter().map(|s| s.to_string()).collect();
    meta.check_columns(&names)?;
    Ok(match kind {
        MetaKind::Linear => MetaModel::Linear(fit_linear_stack(meta, cfg.linear_mode, cfg.linear_intercept)?),
        MetaKind::Tree => {
            cfg.tree.validate().map_err(stage("meta tree"))?;
            let grown = grow_tree(meta, &cfg.tree);
            let tree = if cfg.prune_folds > 0 {
                prune_one_se(&grown, meta, cfg.prune_folds, cfg.prune_seed)
                    .map_err(stage("meta tree"))?
                    .tree
            } else {
                grown
            };
            MetaModel::Tree(tree)
        }
        MetaKind::Forest => MetaModel::Forest(fit_forest(meta, &cfg.forest).map_err(stage("meta forest"))?),
        MetaKind::Gbm => MetaModel::Gbm(fit_gbm(meta, &cfg.gbm).map_err(stage("meta gbm"))?),
    })
}

/// Base learners composed with one meta-learner. Never refit at prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedModel {
    pub base: BaseLearnerSet,
    pub meta_columns: Vec<String>,
    pub meta: MetaModel,
}

impl StackedModel {
    pub fn new(base: BaseLearnerSet, meta: MetaModel) -> Self {
        StackedModel {
            base,
            meta_columns: META_COLUMNS.iter().map(|s| s.to_string()).collect(),
            meta,
        }
    }
}

pub fn predict_stacked(model: &StackedModel, x: &FeatureMatrix, clamp_nonneg: bool) -> Result<Vec<f64>, StackError> {
    let names: Vec<String> = META_COLUMNS.iter().map(|s| s.to_string()).collect();
    if model.meta_columns != names {
        return Err(DatasetError::ColumnMismatch {
            expected: names,
            found: model.meta_columns.clone(),
        }
        .into());
    }
    let mut pred = model.meta.predict(&meta_features(&model.base, x)?)?;
    if clamp_nonneg {
        for v in &mut pred {
            *v = v.max(0.0);
        }
    }
    Ok(pred)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub split: SplitSpec,
    pub log_columns: Vec<Covariate>,
    pub base: BaseConfigs,
    pub meta: MetaConfigs,
    pub meta_kinds: Vec<MetaKind>,
    /// Model the percent differences are taken against; the best base
    /// learner by test RMSE when unset.
    pub baseline: Option<String>,
    pub clamp_nonneg: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            split: SplitSpec::default(),
            log_columns: vec![Covariate::AadtThousands, Covariate::LengthMiles],
            base: BaseConfigs::default(),
            meta: MetaConfigs::default(),
            meta_kinds: vec![MetaKind::Forest],
            baseline: None,
            clamp_nonneg: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub matrices: SplitMatrices,
    pub base: BaseLearnerSet,
    pub metas: Vec<MetaModel>,
    pub meta_validation: FeatureMatrix,
    pub meta_test: FeatureMatrix,
    /// Test-period predictions per model, in report order.
    pub predictions: Vec<(String, Vec<f64>)>,
    pub report: MetricsReport,
}

impl PipelineOutput {
    pub fn stacked(&self, kind: MetaKind) -> Option<StackedModel> {
        self.metas
            .iter()
            .find(|m| m.kind() == kind)
            .map(|m| StackedModel::new(self.base.clone(), m.clone()))
    }

    pub fn predictions_of(&self, model: &str) -> Option<&[f64]> {
        self.predictions.iter().find(|(n, _)| n == model).map(|(_, p)| p.as_slice())
    }
}

/// Train on the training period, fit every requested meta-learner on the
/// validation period, then score all models on the testing period.
pub fn run_pipeline(panel: &SegmentPanel, cfg: &PipelineConfig) -> Result<PipelineOutput, StackError> {
    let matrices = build_features(panel, &cfg.split, &cfg.log_columns).map_err(stage("features"))?;
    let base = train_base_learners(&matrices.train, &cfg.base)?;
    let meta_validation = meta_features(&base, &matrices.validation)?;
    let mut metas = Vec::with_capacity(cfg.meta_kinds.len());
    for &kind in &cfg.meta_kinds {
        metas.push(fit_meta_learner(&meta_validation, kind, &cfg.meta)?);
    }
    let meta_test = meta_features(&base, &matrices.test)?;
    let clamp = |mut v: Vec<f64>| {
        if cfg.clamp_nonneg {
            for p in &mut v {
                *p = p.max(0.0);
            }
        }
        v
    };
    let mut predictions: Vec<(String, Vec<f64>, ModelRole)> = Vec::new();
    for (j, name) in BASE_NAMES.iter().enumerate() {
        predictions.push((name.to_string(), clamp(meta_test.column(j)), ModelRole::Base));
    }
    for m in &metas {
        predictions.push((m.kind().model_name(), clamp(m.predict(&meta_test)?), ModelRole::Meta));
    }
    let scored: Vec<Scored<'_>> = predictions
        .iter()
        .map(|(name, p, role)| Scored {
            name,
            role: *role,
            predictions: p,
        })
        .collect();
    let report = MetricsReport::build(&scored, matrices.test.response(), cfg.baseline.as_deref())?;
    Ok(PipelineOutput {
        predictions: predictions.into_iter().map(|(n, p, _)| (n, p)).collect(),
        matrices,
        base,
        metas,
        meta_validation,
        meta_test,
        report,
    })
}

#![cfg_attr(not(any(feature = "std", test)), no_std)]
//! Heterogeneous stacking ensemble for count-data crash forecasting.
//!
//! Five base learners (Poisson GLM, negative-binomial GLM, regression tree,
//! random forest, gradient boosting) are trained on a training period; a
//! meta-learner is fit on their validation-period predictions; everything is
//! scored out of sample on a testing period.
//!
//! The crate is `no_std` + `alloc`. File formats, CSV/JSON IO and the CLI
//! live in the `crashstack` companion crate. Enable `parallel` to fit forest
//! trees and grid-search folds on a rayon pool; results do not depend on it.

extern crate alloc;

pub mod boosting;
pub mod cart;
pub mod dataset;
pub mod eval;
pub mod forest;
pub mod glm;
pub mod math;
pub mod rng;
pub mod simgen;
pub mod stacking;
pub mod tuning;

mod exec;
mod linalg;

pub use dataset::{
    build_features, describe, Aggregation, Covariate, FeatureMatrix, SegmentPanel, SegmentRecord,
    SplitSpec,
};
pub use boosting::{fit_gbm, predict_gbm, BoostConfig, BoostedModel};
pub use cart::{grow_tree, predict_tree, prune_one_se, RegressionTree, TreeConfig, TreeNode};
pub use eval::{mae, pct_diff, rmse, MetricsReport, ModelRole};
pub use forest::{fit_forest, predict_forest, ForestConfig, RandomForest};
pub use glm::{fit_negbin, fit_poisson, FittedGlm, GlmSpec};
pub use tuning::{grid_search, kfold_split, CvResult, Grid, Learner};
pub use simgen::{generate_panel, true_mean, GenConfig};
pub use stacking::{
    fit_linear_stack, fit_meta_learner, meta_features, predict_stacked, run_pipeline, train_base_learners,
    ConstraintMode, MetaKind, PipelineConfig, StackedModel,
};

//! Whole-pipeline checks through the public API only.

use crashstack_core::dataset::{build_features, SplitSpec};
use crashstack_core::eval::{rmse, ModelRole};
use crashstack_core::forest::ForestConfig;
use crashstack_core::glm::{fit_negbin, GlmSpec};
use crashstack_core::simgen::{generate_panel, true_mean, GenConfig, LOG_COVARIATES};
use crashstack_core::stacking::{predict_stacked, run_pipeline, MetaKind, PipelineConfig, META_COLUMNS};

fn quick_config() -> PipelineConfig {
    let mut cfg = PipelineConfig {
        meta_kinds: MetaKind::ALL.to_vec(),
        ..PipelineConfig::default()
    };
    cfg.base.forest = ForestConfig { n_tree: 80, seed: 3, ..ForestConfig::default() };
    cfg.base.gbm.n_trees = 60;
    cfg.meta.forest.n_tree = 150;
    cfg
}

#[test]
fn pipeline_scores_every_model_on_the_test_year() {
    let panel = generate_panel(&GenConfig { n_segments: 250, seed: 31, ..GenConfig::default() }).unwrap();
    let cfg = quick_config();
    let out = run_pipeline(&panel, &cfg).unwrap();

    assert_eq!(out.report.n, 250);
    assert_eq!(out.report.rows.len(), 5 + MetaKind::ALL.len());
    assert_eq!(out.meta_test.column_names(), META_COLUMNS);
    let base_rows = out.report.rows.iter().filter(|r| r.role == ModelRole::Base).count();
    assert_eq!(base_rows, 5);

    let test = &out.matrices.test;
    for kind in MetaKind::ALL {
        let model = out.stacked(kind).unwrap();
        let again = predict_stacked(&model, test, cfg.clamp_nonneg).unwrap();
        let name = kind.model_name();
        assert_eq!(again, out.predictions_of(&name).unwrap(), "{name}");
        let row = out.report.row(&name).unwrap();
        assert_eq!(row.rmse, rmse(&again, test.response()).unwrap());
    }
    for (_, p) in &out.predictions {
        assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
    }
}

#[test]
fn models_beat_the_constant_forecast_and_trail_the_truth() {
    let gen = GenConfig { n_segments: 600, seed: 32, ..GenConfig::default() };
    let panel = generate_panel(&gen).unwrap();
    let out = run_pipeline(&panel, &quick_config()).unwrap();
    let test = &out.matrices.test;
    let y = test.response();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let constant = rmse(&vec![mean; y.len()], y).unwrap();
    for row in &out.report.rows {
        assert!(row.rmse < constant, "{} {} vs constant {constant}", row.model, row.rmse);
    }
    // Nothing fitted on data should beat the generating mean by much.
    let oracle = rmse(&true_mean(&gen, test).unwrap(), y).unwrap();
    let best = out.report.rows.iter().map(|r| r.rmse).fold(f64::INFINITY, f64::min);
    assert!(best > 0.9 * oracle, "best {best} oracle {oracle}");
}

#[test]
fn negbin_on_training_period_is_near_the_generating_overdispersion() {
    let panel = generate_panel(&GenConfig { n_segments: 3000, seed: 33, ..GenConfig::default() }).unwrap();
    let train = build_features(&panel, &SplitSpec::default(), &LOG_COVARIATES).unwrap().train;
    let model = fit_negbin(&train, &GlmSpec::negbin()).unwrap();
    // Averaging three years of counts shrinks the extra-Poisson variance,
    // so the fitted alpha sits below the per-year value but stays positive.
    let alpha = model.alpha.unwrap();
    assert!(alpha > 0.05 && alpha < 0.528, "alpha {alpha}");
    assert!(model.converged);
}

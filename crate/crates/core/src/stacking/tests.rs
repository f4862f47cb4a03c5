use super::*;
use crate::dataset::{Aggregation, SegmentRecord, ValidationMode};
use crate::math;
use crate::simgen::{generate_panel, GenConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::sync::OnceLock;

fn matrix(cols: &[Vec<f64>], y: Vec<f64>) -> FeatureMatrix {
    let n = y.len();
    let names = (0..cols.len()).map(|j| format!("g{j}")).collect();
    let data = (0..n).flat_map(|i| cols.iter().map(move |c| c[i])).collect();
    FeatureMatrix::from_flat(names, data, y).unwrap()
}

fn in_sample_mse(w: &LinearStackWeights, x: &FeatureMatrix) -> f64 {
    let pred: Vec<f64> = (0..x.n_rows()).map(|i| w.predict_row(x.row(i))).collect();
    train_mse(&pred, x.response())
}

fn lcg(seed: u64, n: usize) -> Vec<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}

#[test]
fn exact_and_scaled_single_learner() {
    let y: Vec<f64> = (0..20).map(|i| f64::from(i % 7) + 1.0).collect();
    for mode in [ConstraintMode::Unconstrained, ConstraintMode::Nonneg, ConstraintMode::Simplex] {
        let w = fit_linear_stack(&matrix(std::slice::from_ref(&y), y.clone()), mode, false).unwrap();
        assert!((w.w[0] - 1.0).abs() < 1e-12, "{mode:?}: {:?}", w.w);
        assert_eq!(w.intercept, None);
    }
    let doubled: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
    for mode in [ConstraintMode::Unconstrained, ConstraintMode::Nonneg] {
        let w = fit_linear_stack(&matrix(std::slice::from_ref(&doubled), y.clone()), mode, false).unwrap();
        assert!((w.w[0] - 0.5).abs() < 1e-12);
    }
}

fn two_learner_case() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let u = lcg(3, 50);
    let v = lcg(4, 50);
    let g1: Vec<f64> = u.iter().map(|a| 5.0 + 10.0 * a).collect();
    let g2: Vec<f64> = g1.iter().zip(&v).map(|(a, b)| 0.8 * a + 3.0 * b).collect();
    // The response leans away from g2, so the free solution puts a negative
    // weight on it.
    let y: Vec<f64> = g1.iter().zip(&g2).zip(&u).map(|((a, b), e)| 1.6 * a - 0.5 * b + e).collect();
    (g1, g2, y)
}

#[test]
fn unconstrained_matches_normal_equations() {
    let (g1, g2, y) = two_learner_case();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (a11, a12, a22) = (dot(&g1, &g1), dot(&g1, &g2), dot(&g2, &g2));
    let (b1, b2) = (dot(&g1, &y), dot(&g2, &y));
    let det = a11 * a22 - a12 * a12;
    let oracle = [(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det];
    let w = fit_linear_stack(&matrix(&[g1, g2], y), ConstraintMode::Unconstrained, false).unwrap();
    assert!(oracle[1] < 0.0);
    for k in 0..2 {
        assert!((w.w[k] - oracle[k]).abs() < 1e-8, "{:?} vs {oracle:?}", w.w);
    }
}

fn sse(cols: &[&[f64]], y: &[f64], w: &[f64]) -> f64 {
    (0..y.len())
        .map(|i| {
            let r = y[i] - cols.iter().zip(w).map(|(c, w)| c[i] * w).sum::<f64>();
            r * r
        })
        .sum()
}

#[test]
fn nonneg_matches_grid_oracle() {
    let (g1, g2, y) = two_learner_case();
    let cols = [g1.as_slice(), g2.as_slice()];
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..=300 {
        for j in 0..=300 {
            let w = [i as f64 * 0.01, j as f64 * 0.01];
            let f = sse(&cols, &y, &w);
            if f < best.0 {
                best = (f, w);
            }
        }
    }
    let centre = best.1;
    for i in -200..=200 {
        for j in -200..=200 {
            let w = [(centre[0] + i as f64 * 1e-4).max(0.0), (centre[1] + j as f64 * 1e-4).max(0.0)];
            let f = sse(&cols, &y, &w);
            if f < best.0 {
                best = (f, w);
            }
        }
    }
    let w = fit_linear_stack(&matrix(&[g1.clone(), g2.clone()], y.clone()), ConstraintMode::Nonneg, false).unwrap();
    assert_eq!(w.w[1], 0.0);
    for k in 0..2 {
        assert!((w.w[k] - best.1[k]).abs() < 1e-3, "{:?} vs {:?}", w.w, best.1);
    }
}

#[test]
fn simplex_matches_grid_oracle() {
    let u = lcg(9, 40);
    let g: Vec<Vec<f64>> = (0..3).map(|k| lcg(20 + k, 40).iter().map(|v| 4.0 + 6.0 * v).collect()).collect();
    let y: Vec<f64> = (0..40).map(|i| 0.2 * g[0][i] + 0.7 * g[1][i] + 0.1 * g[2][i] + u[i] - 0.5).collect();
    let cols: Vec<&[f64]> = g.iter().map(|c| c.as_slice()).collect();
    let mut best = (f64::INFINITY, [0.0; 3]);
    for i in 0..=1000 {
        for j in 0..=(1000 - i) {
            let w = [i as f64 / 1000.0, j as f64 / 1000.0, (1000 - i - j) as f64 / 1000.0];
            let f = sse(&cols, &y, &w);
            if f < best.0 {
                best = (f, w);
            }
        }
    }
    let w = fit_linear_stack(&matrix(&g, y.clone()), ConstraintMode::Simplex, false).unwrap();
    assert!((w.w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for k in 0..3 {
        assert!((w.w[k] - best.1[k]).abs() < 2e-3, "{:?} vs {:?}", w.w, best.1);
    }
    assert!(sse(&cols, &y, &w.w) <= best.0 * (1.0 + 1e-12));
}

#[test]
fn simplex_over_identical_columns_returns_common_prediction() {
    let p: Vec<f64> = lcg(1, 30).iter().map(|v| 3.0 + v).collect();
    let y: Vec<f64> = lcg(2, 30).iter().map(|v| 3.0 + 2.0 * v).collect();
    let x = matrix(&[p.clone(), p.clone(), p.clone()], y);
    let w = fit_linear_stack(&x, ConstraintMode::Simplex, false).unwrap();
    for i in 0..x.n_rows() {
        assert!((w.predict_row(x.row(i)) - p[i]).abs() < 1e-12);
    }
}

#[test]
fn degenerate_meta_features_are_rejected() {
    let x = matrix(&[vec![2.0; 10], vec![3.0; 10]], (0..10).map(f64::from).collect());
    assert!(matches!(fit_linear_stack(&x, ConstraintMode::Nonneg, false), Err(StackError::Degenerate(_))));
    let x = matrix(&[vec![1.0, 2.0], vec![1.0, 3.0], vec![0.0, 1.0]], vec![1.0, 2.0]);
    assert!(matches!(fit_linear_stack(&x, ConstraintMode::Unconstrained, false), Err(StackError::Degenerate(_))));
}

fn meta_case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (1usize..5, 8usize..40).prop_flat_map(|(l, n)| {
        (
            proptest::collection::vec(proptest::collection::vec(0.0f64..20.0, n), l),
            proptest::collection::vec(0.0f64..20.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unconstrained_residuals_are_orthogonal((cols, y) in meta_case()) {
        let x = matrix(&cols, y.clone());
        let w = fit_linear_stack(&x, ConstraintMode::Unconstrained, false).unwrap();
        let scale = y.iter().map(|v| v * v).sum::<f64>().max(1.0);
        for c in &cols {
            let r: f64 = (0..y.len()).map(|i| c[i] * (y[i] - w.predict_row(x.row(i)))).sum();
            let cn = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(r.abs() <= 1e-8 * cn * scale.sqrt(), "residual dot {r}");
        }
    }

    #[test]
    fn constraints_hold((cols, y) in meta_case()) {
        let x = matrix(&cols, y);
        let nn = fit_linear_stack(&x, ConstraintMode::Nonneg, false).unwrap();
        prop_assert!(nn.w.iter().all(|&v| v >= 0.0));
        let sx = fit_linear_stack(&x, ConstraintMode::Simplex, true).unwrap();
        prop_assert!(sx.w.iter().all(|&v| v >= 0.0));
        prop_assert!((sx.w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stack_dominates_every_column((cols, y) in meta_case()) {
        let x = matrix(&cols, y.clone());
        for mode in [ConstraintMode::Unconstrained, ConstraintMode::Nonneg, ConstraintMode::Simplex] {
            let w = fit_linear_stack(&x, mode, true).unwrap();
            let stack = in_sample_mse(&w, &x);
            for c in &cols {
                let single = train_mse(c, &y);
                prop_assert!(stack <= single * (1.0 + 1e-9) + 1e-9, "{mode:?}: {stack} > {single}");
            }
        }
    }

    #[test]
    fn nonneg_is_kkt_optimal((cols, y) in meta_case()) {
        let x = matrix(&cols, y.clone());
        let w = fit_linear_stack(&x, ConstraintMode::Nonneg, false).unwrap();
        let a = DMatrix::from_fn(y.len(), cols.len(), |i, j| cols[j][i]);
        let scale = y.iter().map(|v| v * v).sum::<f64>().max(1.0) * 20.0;
        for j in 0..cols.len() {
            let g: f64 = (0..y.len()).map(|i| a[(i, j)] * (y[i] - w.predict_row(x.row(i)))).sum();
            // Free columns have zero gradient, clamped ones a non-positive one.
            if w.w[j] > 0.0 {
                prop_assert!(g.abs() <= 1e-7 * scale, "free gradient {g}");
            } else {
                prop_assert!(g <= 1e-7 * scale, "clamped gradient {g}");
            }
        }
    }
}

fn small_configs() -> PipelineConfig {
    PipelineConfig {
        base: BaseConfigs {
            forest: ForestConfig { n_tree: 60, ..ForestConfig::default() },
            gbm: BoostConfig { n_trees: 60, ..BoostConfig::default() },
            ..BaseConfigs::default()
        },
        meta: MetaConfigs {
            forest: ForestConfig { n_tree: 100, ..ForestConfig::meta_default() },
            gbm: BoostConfig { n_trees: 50, ..BoostConfig::default() },
            ..MetaConfigs::default()
        },
        meta_kinds: MetaKind::ALL.to_vec(),
        ..PipelineConfig::default()
    }
}

fn panel(n: usize, seed: u64) -> SegmentPanel {
    generate_panel(&GenConfig { n_segments: n, seed, ..GenConfig::default() }).unwrap()
}

fn shared_run() -> &'static (SegmentPanel, PipelineOutput) {
    static RUN: OnceLock<(SegmentPanel, PipelineOutput)> = OnceLock::new();
    RUN.get_or_init(|| {
        let p = panel(200, 11);
        let out = run_pipeline(&p, &small_configs()).unwrap();
        (p, out)
    })
}

#[test]
fn pipeline_report_structure() {
    let (_, out) = shared_run();
    let names: Vec<&str> = out.report.rows.iter().map(|r| r.model.as_str()).collect();
    assert_eq!(
        names,
        ["poisson", "negbin", "tree", "forest", "gbm", "meta_linear", "meta_tree", "meta_forest", "meta_gbm"]
    );
    assert_eq!(out.report.n, 200);
    assert_eq!(out.meta_validation.column_names(), META_COLUMNS.map(String::from).as_slice());
    assert_eq!(out.meta_validation.response(), out.matrices.validation.response());
    let base_best = out
        .report
        .rows
        .iter()
        .filter(|r| r.role == ModelRole::Base)
        .min_by(|a, b| a.rmse.total_cmp(&b.rmse))
        .unwrap();
    assert_eq!(out.report.baseline, base_best.model);
    for (name, p) in &out.predictions {
        assert!(p.iter().all(|v| *v >= 0.0 && v.is_finite()), "{name}");
    }
}

#[test]
fn single_meta_kind_gives_six_rows() {
    let p = panel(80, 5);
    let cfg = PipelineConfig { meta_kinds: vec![MetaKind::Forest], ..small_configs() };
    let out = run_pipeline(&p, &cfg).unwrap();
    assert_eq!(out.report.rows.len(), 6);
    assert_eq!(out.report.rows[5].model, "meta_forest");
}

#[test]
fn pipeline_is_deterministic() {
    let (p, out) = shared_run();
    let again = run_pipeline(p, &small_configs()).unwrap();
    assert_eq!(&again, out);
}

fn permute_year(panel: &SegmentPanel, year: i32) -> SegmentPanel {
    let mut recs: Vec<SegmentRecord> = panel.records().to_vec();
    let idx: Vec<usize> = (0..recs.len()).filter(|&i| recs[i].year == year).collect();
    let counts: Vec<u32> = idx.iter().map(|&i| recs[i].crashes).collect();
    for (k, &i) in idx.iter().enumerate() {
        recs[i].crashes = counts[(k + 7) % counts.len()] + u32::from(k % 3 == 0);
    }
    SegmentPanel::from_records(recs, ValidationMode::Strict).unwrap().0
}

#[test]
fn leakage_probe_test_year() {
    let (p, out) = shared_run();
    let cfg = small_configs();
    let probe = run_pipeline(&permute_year(p, 2017), &cfg).unwrap();
    assert_eq!(probe.base, out.base);
    assert_eq!(probe.metas, out.metas);
    assert_eq!(probe.meta_validation, out.meta_validation);
    assert_eq!(probe.predictions, out.predictions);
    assert_ne!(probe.report, out.report);
}

#[test]
fn leakage_probe_validation_year() {
    let (p, out) = shared_run();
    let probe = run_pipeline(&permute_year(p, 2016), &small_configs()).unwrap();
    assert_eq!(probe.base, out.base);
    assert_ne!(probe.metas, out.metas);
}

#[test]
fn meta_features_on_training_matrix_are_in_sample_predictions() {
    let (_, out) = shared_run();
    let train = &out.matrices.train;
    let m = meta_features(&out.base, train).unwrap();
    assert_eq!(m.column(0), predict_mean(&out.base.poisson, train).unwrap());
    assert_eq!(m.column(1), predict_mean(&out.base.negbin, train).unwrap());
    assert_eq!(m.column(3), predict_forest(&out.base.forest, train).unwrap());
    assert_eq!(m.column(4), predict_gbm(&out.base.gbm, train, false).unwrap());
    let leaves = out.base.tree.leaf_values();
    assert!(m.column(2).iter().all(|v| leaves.contains(v)));
    assert_eq!(m.row_ids(), train.row_ids());
}

#[test]
fn selector_weights_reproduce_each_base_learner() {
    let (_, out) = shared_run();
    let test = &out.matrices.test;
    for k in 0..5 {
        let mut w = vec![0.0; 5];
        w[k] = 1.0;
        let model = StackedModel::new(
            out.base.clone(),
            MetaModel::Linear(LinearStackWeights { w, intercept: None, mode: ConstraintMode::Simplex }),
        );
        let pred = predict_stacked(&model, test, false).unwrap();
        assert_eq!(pred, out.meta_test.column(k), "learner {k}");
    }
    let model = out.stacked(MetaKind::Linear).unwrap();
    let pred = predict_stacked(&model, test, true).unwrap();
    assert_eq!(pred, out.predictions_of("meta_linear").unwrap());
}

#[test]
fn column_mismatch_is_reported() {
    let (_, out) = shared_run();
    let model = out.stacked(MetaKind::Forest).unwrap();
    let raw = crate::dataset::period_features(&shared_run().0, &[2017], Aggregation::MeanPerYear, &[]).unwrap();
    assert!(matches!(predict_stacked(&model, &raw, true), Err(StackError::Data(_))));
    let mut bad = model.clone();
    bad.meta_columns.swap(0, 1);
    assert!(predict_stacked(&bad, &out.matrices.test, true).is_err());
}

#[test]
fn constant_response_base_learners() {
    let p = panel(60, 2);
    let x = crate::dataset::period_features(&p, &[2013], Aggregation::Sum, &crate::simgen::LOG_COVARIATES).unwrap();
    let c = 4.0;
    let x = x.with_response(vec![c; x.n_rows()]).unwrap();
    let cfg = small_configs().base;
    let base = train_base_learners(&x, &cfg).unwrap();
    assert!((base.poisson.beta[0] - math::ln(c)).abs() < 1e-6, "{:?}", base.poisson.beta);
    assert!(base.poisson.beta[1..].iter().all(|b| b.abs() < 1e-6));
    let preds = base.predict_all(&x, false).unwrap();
    for (k, p) in preds.iter().enumerate().skip(2) {
        assert!(p.iter().all(|v| (v - c).abs() < 1e-12), "learner {k}");
    }
}

#[test]
fn base_learner_errors_are_labelled() {
    let p = panel(30, 2);
    let x = crate::dataset::period_features(&p, &[2013], Aggregation::Sum, &crate::simgen::LOG_COVARIATES).unwrap();
    let cfg = BaseConfigs { forest: ForestConfig { m_try: 0, ..ForestConfig::default() }, ..small_configs().base };
    match train_base_learners(&x, &cfg) {
        Err(StackError::Stage { stage, .. }) => assert_eq!(stage, "forest"),
        other => panic!("{other:?}"),
    }
}

fn planted_meta(seed: u64, constant_p3: bool) -> FeatureMatrix {
    let n = 300;
    let y: Vec<f64> = lcg(seed, n).iter().map(|v| math::floor(20.0 * v)).collect();
    let mut cols: Vec<Vec<f64>> = (0..5).map(|k| lcg(seed * 10 + k + 1, n).iter().map(|v| 20.0 * v).collect()).collect();
    cols[3] = y.clone();
    if constant_p3 {
        cols[2] = vec![7.5; n];
    }
    let names = META_COLUMNS.iter().map(|s| s.to_string()).collect();
    let data = (0..n).flat_map(|i| cols.iter().map(|c| c[i]).collect::<Vec<_>>()).collect();
    FeatureMatrix::from_flat(names, data, y).unwrap()
}

#[test]
fn planted_column_dominates_meta_importance() {
    for seed in 1..=5 {
        let meta = planted_meta(seed, false);
        for kind in [MetaKind::Tree, MetaKind::Forest, MetaKind::Gbm, MetaKind::Linear] {
            let cfg = MetaConfigs {
                forest: ForestConfig { n_tree: 150, seed, ..ForestConfig::meta_default() },
                gbm: BoostConfig { seed, ..BoostConfig::default() },
                ..MetaConfigs::default()
            };
            let imp = fit_meta_learner(&meta, kind, &cfg).unwrap().importance();
            let top = imp.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert_eq!(top, 3, "seed {seed} {kind:?}: {imp:?}");
        }
    }
}

#[test]
fn constant_meta_column_gets_zero_importance() {
    let meta = planted_meta(3, true);
    let cfg = MetaConfigs {
        forest: ForestConfig { n_tree: 150, ..ForestConfig::meta_default() },
        ..MetaConfigs::default()
    };
    for kind in [MetaKind::Tree, MetaKind::Forest, MetaKind::Gbm] {
        let imp = fit_meta_learner(&meta, kind, &cfg).unwrap().importance();
        assert_eq!(imp[2], 0.0, "{kind:?}: {imp:?}");
    }
}

#[test]
fn tuned_meta_forest_config_is_accepted() {
    let cfg = ForestConfig::meta_default();
    assert_eq!((cfg.m_try, cfg.max_nodes, cfg.n_tree), (2, 9, 1000));
    assert!(cfg.validate(META_COLUMNS.len()).is_ok());
    assert_eq!(MetaConfigs::default().forest, cfg);
    assert_eq!(PipelineConfig::default().meta_kinds, [MetaKind::Forest]);
}

#[test]
fn meta_model_round_trips_through_serde_value() {
    let (_, out) = shared_run();
    let kinds: Vec<MetaKind> = out.metas.iter().map(MetaModel::kind).collect();
    assert_eq!(kinds, MetaKind::ALL);
    assert_eq!(MetaKind::Forest.model_name(), "meta_forest");
}

#[test]
fn validation_means_track_observed_mean() {
    let p = panel(1000, 21);
    let cfg = small_configs();
    let m = build_features(&p, &cfg.split, &cfg.log_columns).unwrap();
    let base = train_base_learners(&m.train, &cfg.base).unwrap();
    let meta = meta_features(&base, &m.validation).unwrap();
    let observed = math::mean(meta.response());
    for (k, name) in BASE_NAMES.iter().enumerate() {
        let mean = math::mean(&meta.column(k));
        assert!((mean / observed - 1.0).abs() < 0.15, "{name}: {mean} vs {observed}");
    }
}

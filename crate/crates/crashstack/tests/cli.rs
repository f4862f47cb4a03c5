//! End-to-end runs of the `crashstack` binary.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use crashstack::{load_panel, write_panel, PanelSchema};
use crashstack_core::cart::RegressionTree;
use crashstack_core::dataset::{build_features, SplitSpec, ValidationMode};
use crashstack_core::glm::{predict_mean, FittedGlm};
use crashstack_core::simgen::{generate_panel, GenConfig, LOG_COVARIATES};

struct Outcome {
    code: i32,
    run_dir: Option<PathBuf>,
    stderr: String,
}

fn crashstack(args: &[&str]) -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_crashstack"))
        .args(args)
        .env_remove("CRASHSTACK_OUTPUT_DIR")
        .env_remove("CRASHSTACK_THREADS")
        .output()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    Outcome {
        code: out.status.code().unwrap_or(-1),
        run_dir: stdout.lines().next().map(PathBuf::from),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(args: &[&str]) -> PathBuf {
    let o = crashstack(args);
    assert_eq!(o.code, 0, "{args:?} failed: {}", o.stderr);
    o.run_dir.unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

/// A simulated panel written to `dir/panel.csv`.
fn panel_file(dir: &Path, n_segments: usize, seed: u64) -> PathBuf {
    let panel = generate_panel(&GenConfig { n_segments, seed, ..GenConfig::default() }).unwrap();
    let path = dir.join("panel.csv");
    write_panel(&path, &panel).unwrap();
    path
}

#[test]
fn simulate_writes_panel_truth_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("not/yet/there");
    let run = ok(&["--seed", "3", "--output-dir", s(&out), "simulate", "--segments", "40"]);
    assert!(run.starts_with(&out));
    let rows = csv_rows(&run.join("panel.csv"));
    assert_eq!(rows.len(), 40 * 5);
    let truth: serde_json::Value = serde_json::from_slice(&fs::read(run.join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["alpha"], 0.528);
    assert_eq!(truth["seed"], 3);
    let echoed: serde_json::Value = serde_json::from_slice(&fs::read(run.join("config.json")).unwrap()).unwrap();
    assert_eq!(echoed["simulate"]["n_segments"], 40);
    assert!(run.join("describe.csv").exists());

    let again = ok(&["--seed", "3", "--output-dir", s(&tmp.path().join("b")), "simulate", "--segments", "40"]);
    assert_eq!(run.file_name(), again.file_name());
    assert_eq!(fs::read(run.join("panel.csv")).unwrap(), fs::read(again.join("panel.csv")).unwrap());
    let other = ok(&["--seed", "4", "--output-dir", s(&out), "simulate", "--segments", "40"]);
    assert_ne!(run, other);
}

#[test]
fn seed_is_required() {
    let tmp = tempfile::tempdir().unwrap();
    let o = crashstack(&["--output-dir", s(tmp.path()), "simulate"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("seed"), "{}", o.stderr);
}

#[test]
fn unknown_learner_and_zero_threads_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = crashstack(&["--seed", "1", "--output-dir", s(tmp.path()), "fit", "--learner", "svm"]);
    assert_ne!(o.code, 0);
    let o = crashstack(&["--seed", "1", "--threads", "0", "--output-dir", s(tmp.path()), "simulate"]);
    assert_eq!(o.code, 2);
    let o = crashstack(&["--seed", "1", "--output-dir", s(tmp.path()), "stack", "--meta", "svm"]);
    assert_eq!(o.code, 2);
}

#[test]
fn output_dir_comes_from_environment_unless_flagged() {
    let tmp = tempfile::tempdir().unwrap();
    let env_dir = tmp.path().join("env");
    let flag_dir = tmp.path().join("flag");
    let run = |extra: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_crashstack"))
            .args(["--seed", "1"])
            .args(extra)
            .args(["simulate", "--segments", "10"])
            .env("CRASHSTACK_OUTPUT_DIR", &env_dir)
            .output()
            .unwrap();
        assert!(out.status.success());
        PathBuf::from(String::from_utf8(out.stdout).unwrap().lines().next().unwrap())
    };
    assert!(run(&[]).starts_with(&env_dir));
    assert!(run(&["--output-dir", s(&flag_dir)]).starts_with(&flag_dir));
}

#[test]
fn poisson_fit_reloads_and_predicts_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let input = panel_file(tmp.path(), 120, 5);
    let run = ok(&["--seed", "5", "--output-dir", s(tmp.path()), "fit", "--learner", "poisson", "--input", s(&input)]);
    let summary = csv_rows(&run.join("glm_summary.csv"));
    let coefficients: Vec<_> = summary.iter().filter(|r| !r[1].is_empty() && !r[2].is_empty()).collect();
    assert_eq!(coefficients.len(), 8);
    assert_eq!(summary[0][0], "intercept");

    let model: FittedGlm = serde_json::from_slice(&fs::read(run.join("model.json")).unwrap()).unwrap();
    let (panel, _) = load_panel(&input, &PanelSchema::default(), ValidationMode::Strict).unwrap();
    let train = build_features(&panel, &SplitSpec::default(), &LOG_COVARIATES).unwrap().train;
    let pred = predict_mean(&model, &train).unwrap();
    let written: Vec<f64> = csv_rows(&run.join("train_predictions.csv")).iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(pred, written);
}

#[test]
fn tree_predictions_take_one_value_per_leaf() {
    let tmp = tempfile::tempdir().unwrap();
    let input = panel_file(tmp.path(), 150, 6);
    let run = ok(&["--seed", "6", "--output-dir", s(tmp.path()), "fit", "--learner", "tree", "--input", s(&input)]);
    let tree: RegressionTree = serde_json::from_slice(&fs::read(run.join("model.json")).unwrap()).unwrap();
    let distinct: BTreeSet<String> = csv_rows(&run.join("train_predictions.csv")).into_iter().map(|r| r[2].clone()).collect();
    assert!(distinct.len() <= tree.n_leaves());
    let text = fs::read_to_string(run.join("tree.txt")).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(" *")).count(), tree.n_leaves());
}

#[test]
fn gbm_fit_writes_partial_dependence_per_column() {
    let tmp = tempfile::tempdir().unwrap();
    let run = ok(&["--seed", "2", "--output-dir", s(tmp.path()), "fit", "--learner", "gbm"]);
    for col in ["aadt_thousands", "length_miles", "offset_ft"] {
        let rows = csv_rows(&run.join(format!("pd_{col}.csv")));
        assert_eq!(rows.len(), 25);
        assert!(run.join(format!("pd_{col}.svg")).exists());
    }
    let imp: f64 = csv_rows(&run.join("importance.csv")).iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((imp - 100.0).abs() < 1e-9);
}

#[test]
fn tune_writes_cv_table_and_winner() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("tune.toml");
    fs::write(
        &cfg,
        "seed = 4\n[simulate]\nn_segments = 80\n[tune]\nfolds = 3\n[[tune.grid]]\nname = \"max_leaves\"\nvalues = [2, 4, 8]\n",
    )
    .unwrap();
    let run = ok(&["--config", s(&cfg), "--output-dir", s(tmp.path()), "tune", "--learner", "tree"]);
    let cv = csv_rows(&run.join("cv.csv"));
    assert_eq!(cv.len(), 3);
    assert_eq!(cv.iter().filter(|r| r[5] == "1").count(), 1);
    assert!(run.join("winner.json").exists());
    assert!(run.join("curve_max_leaves.svg").exists());
}

#[test]
fn stack_evaluate_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let input = panel_file(tmp.path(), 304, 8);
    let out = tmp.path().join("runs");
    let stack = ok(&["--seed", "8", "--output-dir", s(&out), "stack", "--input", s(&input)]);
    let report = csv_rows(&stack.join("report.csv"));
    let names: Vec<&str> = report.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["poisson", "negbin", "tree", "forest", "gbm", "meta_forest"]);
    assert!(report.iter().any(|r| r[4] == "0"), "baseline row has 0 % difference");
    let preds = csv_rows(&stack.join("predictions.csv"));
    assert_eq!(preds.len(), 304);
    assert!(stack.join("scatter_meta_forest.svg").exists());
    assert_eq!(csv_rows(&stack.join("meta_features_validation.csv")).len(), 304);

    // The same inputs land in the same run directory with identical bytes.
    let rerun = ok(&["--seed", "8", "--output-dir", s(&tmp.path().join("again")), "stack", "--input", s(&input)]);
    assert_eq!(stack.file_name(), rerun.file_name());
    assert_eq!(fs::read(stack.join("report.csv")).unwrap(), fs::read(rerun.join("report.csv")).unwrap());

    let bundle = stack.join("bundle.json");
    let eval = ok(&["--seed", "8", "--output-dir", s(&out), "evaluate", "--bundle", s(&bundle), "--input", s(&input)]);
    assert_eq!(fs::read(stack.join("report.csv")).unwrap(), fs::read(eval.join("report.csv")).unwrap());
    assert_eq!(fs::read(stack.join("predictions.csv")).unwrap(), fs::read(eval.join("predictions.csv")).unwrap());

    let rep = ok(&["--seed", "8", "--output-dir", s(&out), "report", "--bundle", s(&bundle)]);
    let text = fs::read_to_string(rep.join("report.txt")).unwrap();
    assert!(text.contains("Negative binomial"));
    assert!(text.contains("Meta-learner forest"));
    assert!(rep.join("cp_table.csv").exists());

    let all = ok(&["--seed", "8", "--output-dir", s(&out), "stack", "--input", s(&input), "--meta", "all"]);
    let metas: Vec<String> = csv_rows(&all.join("report.csv")).into_iter().filter(|r| r[1] == "meta").map(|r| r[0].clone()).collect();
    assert_eq!(metas, ["meta_tree", "meta_forest", "meta_gbm"]);
}

fn edit_panel(src: &Path, dst: &Path, f: impl Fn(usize, &mut Vec<String>)) {
    let text = fs::read_to_string(src).unwrap();
    let mut lines = text.lines();
    let mut out = vec![lines.next().unwrap().to_string()];
    for (i, line) in lines.enumerate() {
        let mut cells: Vec<String> = line.split(',').map(String::from).collect();
        f(i + 1, &mut cells);
        out.push(cells.join(","));
    }
    fs::write(dst, out.join("\n") + "\n").unwrap();
}

#[test]
fn malformed_panels_are_data_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let good = panel_file(tmp.path(), 30, 9);
    let bad = tmp.path().join("bad.csv");
    let fit = |path: &Path| crashstack(&["--seed", "1", "--output-dir", s(tmp.path()), "fit", "--learner", "poisson", "--input", s(path)]);

    edit_panel(&good, &bad, |row, c| {
        if row == 4 {
            c[4] = "0.05".into();
        }
    });
    let o = fit(&bad);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("row 4") && o.stderr.contains("0.1-mile"), "{}", o.stderr);

    edit_panel(&good, &bad, |row, c| {
        if row == 2 {
            c[1] = "2013".into();
        }
    });
    let o = fit(&bad);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("duplicate"), "{}", o.stderr);

    edit_panel(&good, &bad, |row, c| {
        if row == 7 {
            c[9] = "n/a".into();
        }
    });
    let o = fit(&bad);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("row 7") && o.stderr.contains("offset_ft"), "{}", o.stderr);

    let text = fs::read_to_string(&good).unwrap().replacen("offset_ft", "offset", 1);
    fs::write(&bad, text).unwrap();
    let o = fit(&bad);
    assert_eq!(o.code, 3);
    assert!(o.stderr.contains("missing column \"offset_ft\""), "{}", o.stderr);
}

#[test]
fn lenient_mode_drops_and_lists_bad_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let good = panel_file(tmp.path(), 30, 10);
    let bad = tmp.path().join("short.csv");
    let first_id = csv_rows(&good)[0][0].clone();
    // Every year of one segment is too short, so the rest stays balanced.
    edit_panel(&good, &bad, |_, c| {
        if c[0] == first_id {
            c[4] = "0.05".into();
        }
    });
    let cfg = tmp.path().join("lenient.toml");
    fs::write(&cfg, format!("seed = 1\nvalidation = \"lenient\"\ninput = \"{}\"\n", s(&bad))).unwrap();
    let run = ok(&["--config", s(&cfg), "--output-dir", s(tmp.path()), "fit", "--learner", "poisson"]);
    let dropped = csv_rows(&run.join("dropped_rows.csv"));
    assert_eq!(dropped.len(), 5);
    assert!(dropped.iter().all(|r| r[1] == first_id));
    assert_eq!(csv_rows(&run.join("train_predictions.csv")).len(), 29);
}

#[test]
fn schema_maps_renamed_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let good = panel_file(tmp.path(), 20, 12);
    let renamed = tmp.path().join("renamed.csv");
    fs::write(&renamed, fs::read_to_string(&good).unwrap().replacen("crashes", "total_crashes", 1)).unwrap();
    let schema = PanelSchema { crashes: "total_crashes".into(), ..PanelSchema::default() };
    let (a, _) = load_panel(&good, &PanelSchema::default(), ValidationMode::Strict).unwrap();
    let (b, _) = load_panel(&renamed, &schema, ValidationMode::Strict).unwrap();
    assert_eq!(a, b);
}

#[test]
fn panel_csv_round_trip_is_bit_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let panel = generate_panel(&GenConfig { n_segments: 50, seed: 13, ..GenConfig::default() }).unwrap();
    let path = tmp.path().join("p.csv");
    write_panel(&path, &panel).unwrap();
    let (back, issues) = load_panel(&path, &PanelSchema::default(), ValidationMode::Strict).unwrap();
    assert!(issues.is_empty());
    assert_eq!(back, panel);
    let path2 = tmp.path().join("q.csv");
    write_panel(&path2, &back).unwrap();
    assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
}

//! `crashstack` subcommands. Every command writes into a run directory named
//! after a hash of its resolved configuration and inputs, and echoes that
//! configuration as `config.json`.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use crashstack_core::boosting::{self, BoostError};
use crashstack_core::cart::{self, TreeError};
use crashstack_core::dataset::{self, build_features, Covariate, DatasetError, FeatureMatrix, RowIssue, SegmentPanel, SplitSpec};
use crashstack_core::eval::{MetricsReport, ModelRole, Scored};
use crashstack_core::forest::{self, ForestError};
use crashstack_core::glm::{self, GlmError};
use crashstack_core::simgen::{self, SimError};
use crashstack_core::stacking::{
    predict_stacked, run_pipeline, BaseLearnerSet, MetaKind, MetaModel, StackError, StackedModel, BASE_NAMES,
    META_COLUMNS,
};
use crashstack_core::tuning::{self, Grid, Learner, TuneError};
use serde::{Deserialize, Serialize};

use crate::config::{sha256_hex, ConfigError, RunConfig, ENV_OUTPUT_DIR, ENV_THREADS};
use crate::io::{self, IoError};
use crate::svg;
use crate::tables::{self, num};

#[derive(Debug, Parser)]
#[command(name = "crashstack", version, about = "Stacked count models for segment crash frequency")]
pub struct Cli {
    /// Run configuration (.toml or .json).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random stream; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Parent directory for run directories.
    #[arg(long, global = true, env = ENV_OUTPUT_DIR)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = ENV_THREADS)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic panel and its ground truth.
    Simulate {
        #[arg(long)]
        segments: Option<usize>,
    },
    /// Fit one base learner on the training period.
    Fit {
        #[arg(long, value_enum)]
        learner: BaseArg,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Cross-validated grid search for a tree-based learner.
    Tune {
        #[arg(long, value_enum)]
        learner: TuneArg,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Train base learners, fit meta-learners and score the testing period.
    Stack {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Meta-learners: forest, tree, gbm, linear, a comma list, or `all`
        /// for the three tree-based ones.
        #[arg(long)]
        meta: Option<String>,
    },
    /// Score a saved model bundle on a panel's testing period.
    Evaluate {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Plain-text description of a saved model bundle.
    Report {
        #[arg(long)]
        bundle: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    Poisson,
    Negbin,
    Tree,
    Forest,
    Gbm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TuneArg {
    Tree,
    Forest,
    Gbm,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<GlmError> for CliError {
    fn from(e: GlmError) -> Self {
        match e {
            GlmError::InvalidSpec(_) => CliError::Config(e.to_string()),
            GlmError::Empty | GlmError::NegativeResponse | GlmError::Data(_) => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<TreeError> for CliError {
    fn from(e: TreeError) -> Self {
        match e {
            TreeError::InvalidConfig(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ForestError> for CliError {
    fn from(e: ForestError) -> Self {
        match e {
            ForestError::InvalidConfig(_) => CliError::Config(e.to_string()),
            ForestError::Data(_) | ForestError::ResponseLength { .. } => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<BoostError> for CliError {
    fn from(e: BoostError) -> Self {
        match e {
            BoostError::InvalidConfig(_) => CliError::Config(e.to_string()),
            BoostError::Data(_) | BoostError::InvalidPoissonResponse => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<TuneError> for CliError {
    fn from(e: TuneError) -> Self {
        match e {
            TuneError::TooFewRows { .. } => CliError::Data(e.to_string()),
            TuneError::AllFailed(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Data(_) => CliError::Data(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<StackError> for CliError {
    fn from(e: StackError) -> Self {
        match &e {
            StackError::Data(_) | StackError::Eval(_) => CliError::Data(e.to_string()),
            StackError::Stage { stage, .. } if stage == "features" => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// Where a command wrote its artifacts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub run_dir: PathBuf,
    pub files: Vec<String>,
}

/// A fitted stack with everything needed to score new panels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackBundle {
    pub format: u32,
    pub seed: u64,
    pub split: SplitSpec,
    pub log_columns: Vec<Covariate>,
    pub baseline: Option<String>,
    pub clamp_nonneg: bool,
    pub meta_columns: Vec<String>,
    pub base: BaseLearnerSet,
    pub metas: Vec<MetaModel>,
}

pub const BUNDLE_FORMAT: u32 = 1;

struct Run {
    dir: PathBuf,
    files: Vec<String>,
}

impl Run {
    fn open(cfg: &RunConfig, command: &str, extra: &[u8]) -> Result<Run, CliError> {
        let dir = cfg.output_dir.join(format!("{command}-{}", cfg.fingerprint(command, extra)));
        io::create_dir(&dir)?;
        let mut run = Run { dir, files: Vec::new() };
        run.text("config.json", &io::to_json(cfg))?;
        Ok(run)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let p = self.path(name);
        Ok(io::write_text(&p, text)?)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let p = self.path(name);
        Ok(io::write_json(&p, value)?)
    }

    fn compact_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string(value).map_err(|e| CliError::Data(e.to_string()))?;
        s.push('\n');
        self.text(name, &s)
    }

    fn csv<H: AsRef<str>>(&mut self, name: &str, header: &[H], rows: &[Vec<String>]) -> Result<(), CliError> {
        let p = self.path(name);
        let header: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
        Ok(io::write_csv(&p, &header, rows)?)
    }

    fn finish(self) -> RunOutput {
        RunOutput {
            run_dir: self.dir,
            files: self.files,
        }
    }
}

fn parse_meta(spec: &str) -> Result<Vec<MetaKind>, CliError> {
    if spec == "all" {
        return Ok(MetaKind::TREES.to_vec());
    }
    let mut kinds = Vec::new();
    for name in spec.split(',').map(str::trim) {
        let kind = MetaKind::from_name(name)
            .ok_or_else(|| CliError::Config(format!("unknown meta-learner {name:?} (forest, tree, gbm, linear, all)")))?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    Ok(kinds)
}

/// Merge the config file, environment and flags into a resolved config.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    match &cli.command {
        Command::Simulate { segments: Some(n) } => cfg.simulate.n_segments = *n,
        Command::Fit { input: Some(p), .. } | Command::Stack { input: Some(p), .. } | Command::Tune { input: Some(p), .. } => {
            cfg.input = Some(p.clone())
        }
        Command::Evaluate { input: Some(p), .. } => cfg.input = Some(p.clone()),
        _ => {}
    }
    if let Command::Tune { folds, repeats, .. } = &cli.command {
        if let Some(k) = folds {
            cfg.tune.folds = *k;
        }
        if let Some(r) = repeats {
            cfg.tune.repeats = *r;
        }
    }
    if let Command::Stack { meta: Some(spec), .. } = &cli.command {
        cfg.meta_kinds = parse_meta(spec)?;
    }
    Ok(cfg.resolve()?)
}

/// Run `cli` on a dedicated pool when a thread count is given.
pub fn execute(cli: &Cli) -> Result<RunOutput, CliError> {
    match cli.threads {
        Some(0) => Err(CliError::Config(format!("{ENV_THREADS} / --threads must be positive"))),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<RunOutput, CliError> {
    let cfg = resolve_config(cli)?;
    match &cli.command {
        Command::Simulate { .. } => simulate(&cfg),
        Command::Fit { learner, .. } => fit(&cfg, *learner),
        Command::Tune { learner, .. } => tune(&cfg, *learner),
        Command::Stack { .. } => stack(&cfg),
        Command::Evaluate { bundle, .. } => evaluate(&cfg, bundle),
        Command::Report { bundle } => report(&cfg, bundle),
    }
}

/// The panel named by the config, or a simulated one. Also returns bytes
/// identifying the input for the run fingerprint.
fn acquire_panel(cfg: &RunConfig) -> Result<(SegmentPanel, Vec<RowIssue>, Vec<u8>), CliError> {
    match &cfg.input {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let (panel, issues) = io::load_panel(path, &cfg.schema, cfg.validation)?;
            Ok((panel, issues, sha256_hex(&bytes).into_bytes()))
        }
        None => Ok((simgen::generate_panel(&cfg.simulate)?, Vec::new(), b"simulated".to_vec())),
    }
}

fn write_issues(run: &mut Run, issues: &[RowIssue]) -> Result<(), CliError> {
    if issues.is_empty() {
        return Ok(());
    }
    let rows: Vec<Vec<String>> = issues
        .iter()
        .map(|i| vec![i.row.to_string(), i.segment_id.clone(), i.year.to_string(), i.to_string()])
        .collect();
    run.csv("dropped_rows.csv", &["row", "segment_id", "year", "problem"], &rows)
}

fn validate_learners(cfg: &RunConfig, n_cols: usize) -> Result<(), CliError> {
    cfg.base.tree.validate()?;
    cfg.base.forest.validate(n_cols)?;
    cfg.base.gbm.validate()?;
    Ok(())
}

fn simulate(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let panel = simgen::generate_panel(&cfg.simulate)?;
    let mut run = Run::open(cfg, "simulate", b"")?;
    let p = run.path("panel.csv");
    io::write_panel(&p, &panel)?;
    run.json("truth.json", &simgen::truth(&cfg.simulate))?;
    run.csv("describe.csv", &tables::SUMMARY_HEADER, &tables::summary_rows(&dataset::describe(&panel)))?;
    Ok(run.finish())
}

fn prediction_rows(x: &FeatureMatrix, pred: &[f64]) -> Vec<Vec<String>> {
    x.row_ids()
        .iter()
        .zip(x.response())
        .zip(pred)
        .map(|((id, y), p)| vec![id.clone(), num(*y), num(*p)])
        .collect()
}

fn importance_outputs(run: &mut Run, stem: &str, names: &[String], values: &[f64], label: &str) -> Result<(), CliError> {
    run.csv(&format!("{stem}.csv"), &["column", "importance"], &tables::importance_rows(names, values))?;
    let mut items: Vec<(String, f64)> = names.iter().cloned().zip(values.iter().copied()).collect();
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    run.text(&format!("{stem}.svg"), &svg::bars(stem, label, &items))
}

fn fit(cfg: &RunConfig, learner: BaseArg) -> Result<RunOutput, CliError> {
    let (panel, issues, tag) = acquire_panel(cfg)?;
    let train = build_features(&panel, &cfg.split, &cfg.log_columns)?.train;
    validate_learners(cfg, train.n_cols())?;
    let name = BASE_NAMES[learner as usize];
    let mut run = Run::open(cfg, &format!("fit-{name}"), &tag)?;
    write_issues(&mut run, &issues)?;
    let pred = match learner {
        BaseArg::Poisson | BaseArg::Negbin => {
            let spec = if learner == BaseArg::Poisson { &cfg.base.poisson } else { &cfg.base.negbin };
            let model = if learner == BaseArg::Poisson {
                glm::fit_poisson(&train, spec)?
            } else {
                glm::fit_negbin(&train, spec)?
            };
            let me = glm::marginal_effects(&model, &train, cfg.fit.marginal)?;
            run.json("model.json", &model)?;
            run.csv("glm_summary.csv", &tables::GLM_HEADER, &tables::glm_rows(&model, Some(&me)))?;
            run.text("summary.txt", &tables::glm_text(&model, Some(&me)))?;
            glm::predict_mean(&model, &train)?
        }
        BaseArg::Tree => {
            let grown = cart::grow_tree(&train, &cfg.base.tree);
            let (tree, table) = if cfg.base.prune_folds > 0 {
                let r = cart::prune_one_se(&grown, &train, cfg.base.prune_folds, cfg.base.prune_seed)?;
                (r.tree, r.table)
            } else {
                (grown, Vec::new())
            };
            run.json("model.json", &tree)?;
            run.text("tree.txt", &tree.render())?;
            run.csv("cp_table.csv", &tables::CP_HEADER, &tables::cp_rows(&table))?;
            cart::predict_tree(&tree, &train)?
        }
        BaseArg::Forest => {
            let model = forest::fit_forest(&train, &cfg.base.forest)?;
            run.compact_json("model.json", &model)?;
            importance_outputs(&mut run, "importance", &model.column_names, &model.importance, "%IncMSE (max = 100)")?;
            run.csv(
                "impurity_importance.csv",
                &["column", "importance"],
                &tables::importance_rows(&model.column_names, &model.impurity_importance),
            )?;
            let y = train.response();
            let oob = match (forest::oob_mse(&model, y), forest::oob_r2(&model, y)) {
                (Ok(m), Ok(r)) => format!("OOB MSE {m:.4}\nOOB R2 {r:.4}\n"),
                _ => "OOB error unavailable: some rows were never out of bag\n".to_string(),
            };
            run.text("summary.txt", &format!("{} trees, m_try {}\n{oob}", model.trees.len(), model.config.m_try))?;
            forest::predict_forest(&model, &train)?
        }
        BaseArg::Gbm => {
            let model = boosting::fit_gbm(&train, &cfg.base.gbm)?;
            run.compact_json("model.json", &model)?;
            importance_outputs(&mut run, "importance", &model.column_names, &model.importance, "relative influence (%)")?;
            for (col, cname) in model.column_names.iter().enumerate() {
                let grid = boosting::pd_grid(&train, col, cfg.fit.pd_points);
                let pd = boosting::partial_dependence(&model, col, &grid, &train)?;
                let (xs, ys): (Vec<f64>, Vec<f64>) = pd.iter().copied().unzip();
                run.csv(&format!("pd_{cname}.csv"), &[cname.as_str(), "partial_dependence"], &tables::pairs_rows(&xs, &ys))?;
                let chart = svg::lines(&format!("partial dependence: {cname}"), cname, "predicted crashes", &[(cname.clone(), pd)]);
                run.text(&format!("pd_{cname}.svg"), &chart)?;
            }
            let mse = model.train_mse.last().copied().unwrap_or(f64::NAN);
            run.text("summary.txt", &format!("{} trees, training MSE {mse:.4}\n", model.trees.len()))?;
            boosting::predict_gbm(&model, &train, cfg.clamp_nonneg)?
        }
    };
    run.csv("train_predictions.csv", &["segment_id", "observed", "predicted"], &prediction_rows(&train, &pred))?;
    Ok(run.finish())
}

fn tune(cfg: &RunConfig, learner: TuneArg) -> Result<RunOutput, CliError> {
    let (panel, issues, tag) = acquire_panel(cfg)?;
    let train = build_features(&panel, &cfg.split, &cfg.log_columns)?.train;
    validate_learners(cfg, train.n_cols())?;
    let base = match learner {
        TuneArg::Tree => Learner::Tree(cfg.base.tree),
        TuneArg::Forest => Learner::Forest(cfg.base.forest),
        TuneArg::Gbm => Learner::Gbm(cfg.base.gbm),
    };
    let params = if cfg.tune.grid.is_empty() {
        tuning::default_grid(&base)
    } else {
        cfg.tune.grid.iter().map(|a| (a.name.clone(), a.values.clone())).collect()
    };
    let grid = Grid {
        params,
        metric: cfg.tune.metric,
        folds: cfg.tune.folds,
        repeats: cfg.tune.repeats,
        seed: cfg.seed(),
    };
    let result = tuning::grid_search(&train, &base, &grid)?;
    let mut run = Run::open(cfg, &format!("tune-{}", base.name()), &tag)?;
    write_issues(&mut run, &issues)?;
    run.csv("cv.csv", &tables::cv_header(&result), &tables::cv_rows(&result))?;
    run.json("winner.json", &tuning::winner_learner(&result, &base)?)?;
    let mut curve_rows = Vec::new();
    for curve in result.marginal_curves() {
        for (v, s) in &curve.points {
            curve_rows.push(vec![curve.param.clone(), num(*v), num(*s)]);
        }
        let chart = svg::lines(
            &format!("cross-validated {}", curve.param),
            &curve.param,
            "CV RMSE",
            &[(curve.param.clone(), curve.points.clone())],
        );
        run.text(&format!("curve_{}.svg", curve.param), &chart)?;
    }
    run.csv("curves.csv", &["param", "value", "score"], &curve_rows)?;
    Ok(run.finish())
}

/// Report, predictions and one scatter per model for a scored period.
fn write_scored(
    run: &mut Run,
    test: &FeatureMatrix,
    predictions: &[(String, Vec<f64>)],
    report: &MetricsReport,
) -> Result<(), CliError> {
    run.csv("report.csv", &tables::REPORT_HEADER, &tables::report_rows(report))?;
    run.text("report.txt", &tables::report_text(report))?;
    let mut header = vec!["segment_id".to_string(), "observed".to_string()];
    header.extend(predictions.iter().map(|(n, _)| n.clone()));
    let rows: Vec<Vec<String>> = (0..test.n_rows())
        .map(|i| {
            let mut r = vec![test.row_ids()[i].clone(), num(test.response()[i])];
            r.extend(predictions.iter().map(|(_, p)| num(p[i])));
            r
        })
        .collect();
    run.csv("predictions.csv", &header, &rows)?;
    for (name, pred) in predictions {
        run.csv(&format!("scatter_{name}.csv"), &["observed", "predicted"], &tables::pairs_rows(test.response(), pred))?;
        run.text(&format!("scatter_{name}.svg"), &svg::scatter(&format!("{name}: observed vs predicted"), pred, test.response()))?;
    }
    Ok(())
}

fn stack(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let (panel, issues, tag) = acquire_panel(cfg)?;
    validate_learners(cfg, Covariate::ALL.len())?;
    let out = run_pipeline(&panel, &cfg.pipeline())?;
    let mut run = Run::open(cfg, "stack", &tag)?;
    write_issues(&mut run, &issues)?;
    let bundle = StackBundle {
        format: BUNDLE_FORMAT,
        seed: cfg.seed(),
        split: cfg.split.clone(),
        log_columns: cfg.log_columns.clone(),
        baseline: cfg.baseline.clone(),
        clamp_nonneg: cfg.clamp_nonneg,
        meta_columns: META_COLUMNS.iter().map(|s| s.to_string()).collect(),
        base: out.base.clone(),
        metas: out.metas.clone(),
    };
    run.compact_json("bundle.json", &bundle)?;
    run.json("diagnostics.json", &out.base.diagnostics)?;
    write_scored(&mut run, &out.matrices.test, &out.predictions, &out.report)?;
    for (stem, m) in [("validation", &out.meta_validation), ("test", &out.meta_test)] {
        let mut header = vec!["segment_id".to_string(), "observed".to_string()];
        header.extend(m.column_names().iter().cloned());
        let rows: Vec<Vec<String>> = (0..m.n_rows())
            .map(|i| {
                let mut r = vec![m.row_ids()[i].clone(), num(m.response()[i])];
                r.extend(m.row(i).iter().map(|v| num(*v)));
                r
            })
            .collect();
        run.csv(&format!("meta_features_{stem}.csv"), &header, &rows)?;
        let mut stats = dataset::describe_matrix(m);
        stats.push(dataset::ColumnSummary::of("observed", m.response()));
        run.csv(&format!("meta_summary_{stem}.csv"), &tables::SUMMARY_HEADER, &tables::summary_rows(&stats))?;
    }
    let names: Vec<String> = META_COLUMNS.iter().map(|s| s.to_string()).collect();
    for m in &out.metas {
        importance_outputs(&mut run, &format!("importance_{}", m.kind().model_name()), &names, &m.importance(), "importance")?;
    }
    Ok(run.finish())
}

fn load_bundle(path: &Path) -> Result<(StackBundle, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let bundle: StackBundle = io::read_json(path)?;
    if bundle.format != BUNDLE_FORMAT {
        return Err(CliError::Data(format!("unsupported bundle format {}", bundle.format)));
    }
    Ok((bundle, sha256_hex(&bytes).into_bytes()))
}

fn evaluate(cfg: &RunConfig, bundle_path: &Path) -> Result<RunOutput, CliError> {
    let (bundle, bundle_tag) = load_bundle(bundle_path)?;
    let (panel, issues, tag) = acquire_panel(cfg)?;
    let test = build_features(&panel, &bundle.split, &bundle.log_columns)?.test;
    let base_preds = bundle.base.predict_all(&test, bundle.clamp_nonneg)?;
    let mut predictions: Vec<(String, Vec<f64>)> =
        BASE_NAMES.iter().map(|n| n.to_string()).zip(base_preds).collect();
    for meta in &bundle.metas {
        let model = StackedModel {
            base: bundle.base.clone(),
            meta_columns: bundle.meta_columns.clone(),
            meta: meta.clone(),
        };
        predictions.push((meta.kind().model_name(), predict_stacked(&model, &test, bundle.clamp_nonneg)?));
    }
    let scored: Vec<Scored<'_>> = predictions
        .iter()
        .enumerate()
        .map(|(k, (name, p))| Scored {
            name,
            role: if k < BASE_NAMES.len() { ModelRole::Base } else { ModelRole::Meta },
            predictions: p,
        })
        .collect();
    let report = MetricsReport::build(&scored, test.response(), bundle.baseline.as_deref())
        .map_err(|e| CliError::Data(e.to_string()))?;
    let mut run = Run::open(cfg, "evaluate", &[bundle_tag, tag].concat())?;
    write_issues(&mut run, &issues)?;
    write_scored(&mut run, &test, &predictions, &report)?;
    Ok(run.finish())
}

fn report(cfg: &RunConfig, bundle_path: &Path) -> Result<RunOutput, CliError> {
    use std::fmt::Write;
    let (bundle, tag) = load_bundle(bundle_path)?;
    let b = &bundle.base;
    let d = &b.diagnostics;
    let mut text = String::new();
    let _ = writeln!(text, "Stack bundle (seed {})", bundle.seed);
    let _ = writeln!(
        text,
        "train {:?} | validation {:?} | test {:?}\n",
        bundle.split.train_years, bundle.split.validation_years, bundle.split.test_years
    );
    text.push_str(&tables::glm_text(&b.poisson, None));
    text.push('\n');
    text.push_str(&tables::glm_text(&b.negbin, None));
    let _ = writeln!(text, "\nRegression tree ({} leaves, training MSE {:.4})", d.tree_leaves, d.tree_train_mse);
    text.push_str(&b.tree.render());
    let oob = d.forest_oob_mse.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    let _ = writeln!(text, "\nRandom forest ({} trees, OOB MSE {oob})", b.forest.trees.len());
    for (c, v) in b.forest.column_names.iter().zip(&b.forest.importance) {
        let _ = writeln!(text, "  {c:<16} {v:>8.2}");
    }
    let _ = writeln!(text, "\nGradient boosting ({} trees, training MSE {:.4})", b.gbm.trees.len(), d.gbm_train_mse);
    for (c, v) in b.gbm.column_names.iter().zip(&b.gbm.importance) {
        let _ = writeln!(text, "  {c:<16} {v:>8.2}");
    }
    for m in &bundle.metas {
        let _ = writeln!(text, "\nMeta-learner {}", m.kind().as_str());
        if let MetaModel::Linear(w) = m {
            let _ = writeln!(text, "  mode {:?}, intercept {:?}", w.mode, w.intercept);
        }
        for (c, v) in bundle.meta_columns.iter().zip(m.importance()) {
            let _ = writeln!(text, "  {c:<12} {v:>10.4}");
        }
    }
    let mut run = Run::open(cfg, "report", &tag)?;
    run.text("report.txt", &text)?;
    run.text("tree.txt", &b.tree.render())?;
    run.csv("cp_table.csv", &tables::CP_HEADER, &tables::cp_rows(&b.tree_cp_table))?;
    run.csv("poisson_summary.csv", &tables::GLM_HEADER, &tables::glm_rows(&b.poisson, None))?;
    run.csv("negbin_summary.csv", &tables::GLM_HEADER, &tables::glm_rows(&b.negbin, None))?;
    run.csv("forest_importance.csv", &["column", "importance"], &tables::importance_rows(&b.forest.column_names, &b.forest.importance))?;
    run.csv("gbm_importance.csv", &["column", "importance"], &tables::importance_rows(&b.gbm.column_names, &b.gbm.importance))?;
    Ok(run.finish())
}

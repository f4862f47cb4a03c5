//! Run configuration loaded from TOML or JSON.

use std::path::{Path, PathBuf};

use crashstack_core::dataset::{Covariate, SplitSpec, ValidationMode};
use crashstack_core::glm::MarginalKind;
use crashstack_core::simgen::GenConfig;
use crashstack_core::stacking::{BaseConfigs, ConstraintMode, MetaConfigs, MetaKind, PipelineConfig};
use crashstack_core::tuning::Metric;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::PanelSchema;

pub const ENV_OUTPUT_DIR: &str = "CRASHSTACK_OUTPUT_DIR";
pub const ENV_THREADS: &str = "CRASHSTACK_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

/// One named parameter axis of a tuning grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneOptions {
    pub folds: usize,
    pub repeats: usize,
    pub metric: Metric,
    /// Replaces the learner's default grid when non-empty.
    pub grid: Vec<GridAxis>,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            folds: 10,
            repeats: 1,
            metric: Metric::Rmse,
            grid: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub marginal: MarginalKind,
    /// Grid points per partial-dependence curve.
    pub pd_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            marginal: MarginalKind::Average,
            pd_points: 25,
        }
    }
}

/// Everything a command needs. `seed` has no default: every run names its
/// seed, which then drives every random stream (simulation, bootstrap,
/// subsampling, fold assignment), overriding per-learner seed fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Panel CSV; when absent, commands simulate one from `simulate`.
    pub input: Option<PathBuf>,
    pub schema: PanelSchema,
    pub validation: ValidationMode,
    pub output_dir: PathBuf,
    pub split: SplitSpec,
    pub log_columns: Vec<Covariate>,
    pub base: BaseConfigs,
    pub meta: MetaConfigs,
    pub meta_kinds: Vec<MetaKind>,
    pub constraint_mode: ConstraintMode,
    pub baseline: Option<String>,
    pub clamp_nonneg: bool,
    pub simulate: GenConfig,
    pub tune: TuneOptions,
    pub fit: FitOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        RunConfig {
            seed: None,
            input: None,
            schema: PanelSchema::default(),
            validation: ValidationMode::Strict,
            output_dir: PathBuf::from("runs"),
            split: p.split,
            log_columns: p.log_columns,
            base: p.base,
            meta: p.meta,
            meta_kinds: p.meta_kinds,
            constraint_mode: ConstraintMode::Nonneg,
            baseline: None,
            clamp_nonneg: true,
            simulate: GenConfig::default(),
            tune: TuneOptions::default(),
            fit: FitOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).map_err(|e| e.to_string()),
            Some("json") => serde_json::from_str(&text).map_err(|e| e.to_string()),
            _ => Err("config file must end in .toml or .json".to_string()),
        };
        let mut cfg: RunConfig = parsed.map_err(|message| ConfigError::Parse {
            path: path.display().to_string(),
            message,
        })?;
        // Relative input paths are taken relative to the config file.
        if let (Some(input), Some(dir)) = (&cfg.input, path.parent()) {
            if input.is_relative() {
                cfg.input = Some(dir.join(input));
            }
        }
        Ok(cfg)
    }

    /// Fill every seed field from `seed` and check the result.
    pub fn resolve(mut self) -> Result<RunConfig, ConfigError> {
        let seed = self
            .seed
            .ok_or_else(|| ConfigError::Invalid("a seed is required (config `seed` or --seed)".into()))?;
        self.simulate.seed = seed;
        self.base.forest.seed = seed;
        self.base.gbm.seed = seed;
        self.base.prune_seed = seed;
        self.meta.forest.seed = seed;
        self.meta.gbm.seed = seed;
        self.meta.prune_seed = seed;
        self.meta.linear_mode = self.constraint_mode;
        if self.meta_kinds.is_empty() {
            return Err(ConfigError::Invalid("meta_kinds must name at least one meta-learner".into()));
        }
        self.split.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.tune.folds < 2 {
            return Err(ConfigError::Invalid("tune.folds must be at least 2".into()));
        }
        if self.tune.repeats < 1 {
            return Err(ConfigError::Invalid("tune.repeats must be at least 1".into()));
        }
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            split: self.split.clone(),
            log_columns: self.log_columns.clone(),
            base: self.base.clone(),
            meta: self.meta.clone(),
            meta_kinds: self.meta_kinds.clone(),
            baseline: self.baseline.clone(),
            clamp_nonneg: self.clamp_nonneg,
        }
    }

    /// Short content hash naming the run directory. The output directory
    /// itself is excluded so relocating runs keeps their names.
    pub fn fingerprint(&self, command: &str, extra: &[u8]) -> String {
        let mut hashed = self.clone();
        hashed.output_dir = PathBuf::new();
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(serde_json::to_vec(&hashed).expect("config serializes"));
        h.update([0]);
        h.update(extra);
        h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

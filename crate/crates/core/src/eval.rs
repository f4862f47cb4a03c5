//! Out-of-sample accuracy: RMSE, MAE, percent differences against a
//! baseline model, and absolute-error distributions.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("prediction length {pred} differs from observation length {obs}")]
    LengthMismatch { pred: usize, obs: usize },
    #[error("no observations to score")]
    Empty,
    #[error("baseline metric must be positive, got {0}")]
    ZeroBaseline(f64),
    #[error("baseline model {0:?} is not in the report")]
    UnknownBaseline(String),
}

fn errors(pred: &[f64], obs: &[f64]) -> Result<Vec<f64>, EvalError> {
    if pred.len() != obs.len() {
        return Err(EvalError::LengthMismatch {
            pred: pred.len(),
            obs: obs.len(),
        });
    }
    if pred.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(pred.iter().zip(obs).map(|(f, y)| f - y).collect())
}

pub fn rmse(pred: &[f64], obs: &[f64]) -> Result<f64, EvalError> {
    let e = errors(pred, obs)?;
    Ok(math::sqrt(math::fsum(e.iter().map(|v| v * v)) / e.len() as f64))
}

pub fn mae(pred: &[f64], obs: &[f64]) -> Result<f64, EvalError> {
    let e = errors(pred, obs)?;
    Ok(math::fsum(e.iter().map(|v| v.abs())) / e.len() as f64)
}

/// Signed percentage difference of `metric` relative to `baseline`.
pub fn pct_diff(metric: f64, baseline: f64) -> Result<f64, EvalError> {
    if !(baseline > 0.0) {
        return Err(EvalError::ZeroBaseline(baseline));
    }
    Ok((metric - baseline) / baseline * 100.0)
}

/// Summary of `|obs − pred|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorDistribution {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

pub fn error_distribution(pred: &[f64], obs: &[f64]) -> Result<ErrorDistribution, EvalError> {
    let abs: Vec<f64> = errors(pred, obs)?.iter().map(|v| v.abs()).collect();
    let (min, max) = math::min_max(&abs);
    Ok(ErrorDistribution {
        n: abs.len(),
        mean: math::fsum(abs.iter().copied()) / abs.len() as f64,
        sd: math::sample_sd(&abs),
        min,
        max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelRole {
    Base,
    Meta,
}

impl ModelRole {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelRole::Base => "base",
            ModelRole::Meta => "meta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model: String,
    pub role: ModelRole,
    pub rmse: f64,
    pub mae: f64,
    pub pct_diff_rmse: f64,
    pub pct_diff_mae: f64,
    pub abs_error: ErrorDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<MetricsRow>,
    pub baseline: String,
    pub n: usize,
}

/// One scored model: name, role and predictions for the evaluation period.
pub struct Scored<'a> {
    pub name: &'a str,
    pub role: ModelRole,
    pub predictions: &'a [f64],
}

impl MetricsReport {
    /// Score every model against `obs`. Percent differences are taken against
    /// `baseline`, or against the base learner with the lowest RMSE.
    pub fn build(models: &[Scored<'_>], obs: &[f64], baseline: Option<&str>) -> Result<MetricsReport, EvalError> {
        let mut rows = Vec::with_capacity(models.len());
        for m in models {
            rows.push(MetricsRow {
                model: m.name.into(),
                role: m.role,
                rmse: rmse(m.predictions, obs)?,
                mae: mae(m.predictions, obs)?,
                pct_diff_rmse: 0.0,
                pct_diff_mae: 0.0,
                abs_error: error_distribution(m.predictions, obs)?,
            });
        }
        let base_idx = match baseline {
            Some(name) => rows
                .iter()
                .position(|r| r.model == name)
                .ok_or_else(|| EvalError::UnknownBaseline(name.into()))?,
            None => {
                let mut best: Option<usize> = None;
                for (i, r) in rows.iter().enumerate() {
                    if r.role == ModelRole::Base && best.is_none_or(|b| r.rmse < rows[b].rmse) {
                        best = Some(i);
                    }
                }
                best.or(if rows.is_empty() { None } else { Some(0) })
                    .ok_or(EvalError::Empty)?
            }
        };
        let (base_rmse, base_mae) = (rows[base_idx].rmse, rows[base_idx].mae);
        for (i, r) in rows.iter_mut().enumerate() {
            if i == base_idx {
                continue;
            }
            r.pct_diff_rmse = pct_diff(r.rmse, base_rmse)?;
            r.pct_diff_mae = pct_diff(r.mae, base_mae)?;
        }
        Ok(MetricsReport {
            baseline: rows[base_idx].model.clone(),
            rows,
            n: obs.len(),
        })
    }

    pub fn row(&self, model: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.model == model)
    }
}

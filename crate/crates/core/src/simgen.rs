//! Synthetic segment panels with known negative-binomial ground truth.
//!
//! Fixed covariates are drawn once per segment; AADT drifts by a yearly
//! growth factor with small multiplicative noise. Crashes for each
//! segment-year are a gamma-mixed Poisson draw around
//! `exp(β₀ + β₁·ln AADT + β₂·ln length + …)`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::dataset::{Covariate, DatasetError, FeatureMatrix, SegmentPanel, SegmentRecord, ValidationMode};
use crate::math;
use crate::rng::{self, stream, StreamRng};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("envelope for {name} cannot be satisfied: {reason}")]
    Envelope { name: String, reason: String },
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Data(#[from] DatasetError),
}

/// Target moments and hard bounds for one covariate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Envelope {
    pub const fn new(mean: f64, sd: f64, min: f64, max: f64) -> Self {
        Envelope { mean, sd, min, max }
    }

    fn check(&self, name: &str) -> Result<(), SimError> {
        let fail = |reason: String| {
            Err(SimError::Envelope {
                name: name.to_string(),
                reason,
            })
        };
        if ![self.mean, self.sd, self.min, self.max].iter().all(|v| v.is_finite()) {
            return fail("non-finite bound".into());
        }
        if !(self.min <= self.mean && self.mean <= self.max) {
            return fail(format!("mean {} outside [{}, {}]", self.mean, self.min, self.max));
        }
        if self.sd < 0.0 {
            return fail(format!("negative sd {}", self.sd));
        }
        Ok(())
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub n_segments: usize,
    pub years: Vec<i32>,
    /// Intercept, ln AADT, ln length, four driveway densities, offset.
    pub true_beta: Vec<f64>,
    /// Overdispersion of the gamma mixing; 0 gives pure Poisson counts.
    pub true_alpha: f64,
    pub aadt: Envelope,
    pub length: Envelope,
    pub drv_major_com: Envelope,
    pub drv_minor_com: Envelope,
    pub drv_major_ind: Envelope,
    pub drv_minor_ind: Envelope,
    pub offset: Envelope,
    /// Multiplicative AADT drift per year.
    pub aadt_growth: f64,
    /// Year at which a segment's AADT equals its drawn base value.
    pub aadt_reference_year: i32,
    /// Standard deviation of the yearly log-AADT noise.
    pub aadt_year_noise: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_segments: 304,
            years: (2013..=2017).collect(),
            true_beta: vec![-0.446, 1.146, 0.522, 0.102, 0.097, 0.067, 0.045, -0.019],
            true_alpha: 0.528,
            aadt: Envelope::new(19.098, 8.938, 3.182, 49.766),
            length: Envelope::new(0.340, 0.279, 0.100, 1.809),
            drv_major_com: Envelope::new(0.349, 0.781, 0.0, 6.0),
            drv_minor_com: Envelope::new(0.865, 1.626, 0.0, 12.0),
            drv_major_ind: Envelope::new(0.461, 0.936, 0.0, 7.0),
            drv_minor_ind: Envelope::new(1.286, 1.844, 0.0, 11.0),
            offset: Envelope::new(14.266, 8.188, 0.0, 30.0),
            aadt_growth: 1.014,
            aadt_reference_year: 2014,
            aadt_year_noise: 0.02,
            seed: 0,
        }
    }
}

/// Covariates stored as natural logs in the generator's design.
pub const LOG_COVARIATES: [Covariate; 2] = [Covariate::AadtThousands, Covariate::LengthMiles];

impl GenConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if self.n_segments == 0 {
            return bad("n_segments must be positive".into());
        }
        if self.years.is_empty() {
            return bad("years must be non-empty".into());
        }
        let mut ys = self.years.clone();
        ys.sort_unstable();
        ys.dedup();
        if ys.len() != self.years.len() {
            return bad("years must be distinct".into());
        }
        if self.true_beta.len() != Covariate::ALL.len() + 1 {
            return bad(format!(
                "true_beta needs {} entries, got {}",
                Covariate::ALL.len() + 1,
                self.true_beta.len()
            ));
        }
        if !self.true_beta.iter().all(|b| b.is_finite()) {
            return bad("true_beta must be finite".into());
        }
        if !(self.true_alpha >= 0.0 && self.true_alpha.is_finite()) {
            return bad(format!("true_alpha {} must be >= 0", self.true_alpha));
        }
        if !(self.aadt_growth > 0.0 && self.aadt_growth.is_finite()) {
            return bad("aadt_growth must be positive".into());
        }
        if !(self.aadt_year_noise >= 0.0 && self.aadt_year_noise.is_finite()) {
            return bad("aadt_year_noise must be >= 0".into());
        }
        for (c, env) in self.envelopes() {
            env.check(c.name())?;
        }
        for (c, env) in [(Covariate::AadtThousands, self.aadt), (Covariate::LengthMiles, self.length)] {
            if !(env.min > 0.0) {
                return Err(SimError::Envelope {
                    name: c.name().to_string(),
                    reason: "lognormal envelope needs a positive minimum".into(),
                });
            }
        }
        if self.length.min < crate::dataset::MIN_SEGMENT_LENGTH_MILES {
            return Err(SimError::Envelope {
                name: "length_miles".into(),
                reason: format!(
                    "minimum {} is below the {} mile segment floor",
                    self.length.min,
                    crate::dataset::MIN_SEGMENT_LENGTH_MILES
                ),
            });
        }
        for (c, env) in self.envelopes().into_iter().skip(2) {
            if env.min < 0.0 {
                return Err(SimError::Envelope {
                    name: c.name().to_string(),
                    reason: "covariate must be non-negative".into(),
                });
            }
        }
        Ok(())
    }

    fn envelopes(&self) -> [(Covariate, Envelope); 7] {
        [
            (Covariate::AadtThousands, self.aadt),
            (Covariate::LengthMiles, self.length),
            (Covariate::DrvMajorCom, self.drv_major_com),
            (Covariate::DrvMinorCom, self.drv_minor_com),
            (Covariate::DrvMajorInd, self.drv_major_ind),
            (Covariate::DrvMinorInd, self.drv_minor_ind),
            (Covariate::OffsetFt, self.offset),
        ]
    }

    /// `exp(xᵀβ)` for one record's covariates.
    pub fn record_mean(&self, r: &SegmentRecord) -> f64 {
        let mut eta = self.true_beta[0];
        for (j, c) in Covariate::ALL.iter().enumerate() {
            let v = c.value(r);
            let v = if LOG_COVARIATES.contains(c) { math::ln(v) } else { v };
            eta += self.true_beta[j + 1] * v;
        }
        math::exp(eta)
    }
}

/// Ground truth written next to a simulated panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub beta: Vec<f64>,
    pub alpha: f64,
    pub seed: u64,
    pub columns: Vec<String>,
    pub log_columns: Vec<String>,
}

pub fn truth(cfg: &GenConfig) -> Truth {
    Truth {
        beta: cfg.true_beta.clone(),
        alpha: cfg.true_alpha,
        seed: cfg.seed,
        columns: Covariate::ALL.iter().map(|c| c.name().to_string()).collect(),
        log_columns: LOG_COVARIATES.iter().map(|c| c.name().to_string()).collect(),
    }
}

fn lognormal(rng: &mut StreamRng, env: &Envelope) -> f64 {
    let mean = env.mean.max(f64::MIN_POSITIVE);
    let sigma2 = math::ln_1p((env.sd / mean) * (env.sd / mean));
    let mu = math::ln(mean) - 0.5 * sigma2;
    let d = LogNormal::new(mu, math::sqrt(sigma2)).expect("finite lognormal parameters");
    env.clamp(d.sample(rng))
}

/// Non-negative integer with the envelope's mean and variance: negative
/// binomial when overdispersed, Poisson otherwise.
fn count_like(rng: &mut StreamRng, env: &Envelope) -> f64 {
    if env.mean <= 0.0 {
        return env.clamp(0.0);
    }
    let var = env.sd * env.sd;
    let rate = if var > env.mean {
        let shape = env.mean * env.mean / (var - env.mean);
        Gamma::new(shape, env.mean / shape).expect("positive gamma parameters").sample(rng)
    } else {
        env.mean
    };
    env.clamp(poisson(rng, rate))
}

fn uniform_matched(rng: &mut StreamRng, env: &Envelope) -> f64 {
    let half = math::sqrt(3.0) * env.sd;
    let lo = env.mean - half;
    let hi = env.mean + half;
    env.clamp(lo + (hi - lo) * rng.random::<f64>())
}

fn poisson(rng: &mut StreamRng, rate: f64) -> f64 {
    if !(rate > 0.0) {
        return 0.0;
    }
    Poisson::new(rate).expect("finite positive rate").sample(rng)
}

/// Gamma-mixed Poisson draw with mean `mean` and variance `mean + alpha·mean²`.
pub fn negbin_draw(rng: &mut StreamRng, mean: f64, alpha: f64) -> u32 {
    let rate = if alpha > 0.0 {
        mean * Gamma::new(1.0 / alpha, alpha).expect("positive gamma parameters").sample(rng)
    } else {
        mean
    };
    poisson(rng, rate) as u32
}

/// Generate a validated panel of `n_segments × years` records.
pub fn generate_panel(cfg: &GenConfig) -> Result<SegmentPanel, SimError> {
    cfg.validate()?;
    let mut rng = rng::stream_rng(cfg.seed, stream::SIMGEN);
    let year_noise = Normal::new(0.0, cfg.aadt_year_noise).expect("finite noise sd");
    let width = cfg.n_segments.to_string().len().max(4);
    let mut records = Vec::with_capacity(cfg.n_segments * cfg.years.len());
    for s in 0..cfg.n_segments {
        let base_aadt = lognormal(&mut rng, &cfg.aadt);
        let length = lognormal(&mut rng, &cfg.length);
        let drv = [
            count_like(&mut rng, &cfg.drv_major_com),
            count_like(&mut rng, &cfg.drv_minor_com),
            count_like(&mut rng, &cfg.drv_major_ind),
            count_like(&mut rng, &cfg.drv_minor_ind),
        ];
        let offset = uniform_matched(&mut rng, &cfg.offset);
        for &year in &cfg.years {
            let drift = math::exp(
                (year - cfg.aadt_reference_year) as f64 * math::ln(cfg.aadt_growth) + year_noise.sample(&mut rng),
            );
            let mut r = SegmentRecord {
                segment_id: format!("S{s:0width$}"),
                year,
                crashes: 0,
                aadt_thousands: base_aadt * drift,
                length_miles: length,
                drv_major_com: drv[0],
                drv_minor_com: drv[1],
                drv_major_ind: drv[2],
                drv_minor_ind: drv[3],
                offset_ft: offset,
            };
            r.crashes = negbin_draw(&mut rng, cfg.record_mean(&r), cfg.true_alpha);
            records.push(r);
        }
    }
    let (panel, _) = SegmentPanel::from_records(records, ValidationMode::Strict)?;
    Ok(panel)
}

/// Expected counts under the generator's coefficients for a matrix in the
/// generator's design (all covariates, AADT and length logged).
pub fn true_mean(cfg: &GenConfig, x: &FeatureMatrix) -> Result<Vec<f64>, SimError> {
    let t = truth(cfg);
    x.check_columns(&t.columns)?;
    let mut logged = x.log_columns().to_vec();
    logged.sort();
    let mut want = t.log_columns.clone();
    want.sort();
    if logged != want {
        return Err(SimError::Data(DatasetError::ColumnMismatch {
            expected: want,
            found: logged,
        }));
    }
    if cfg.true_beta.len() != x.n_cols() + 1 {
        return Err(SimError::InvalidConfig("true_beta length does not match the design".into()));
    }
    Ok((0..x.n_rows())
        .map(|i| {
            let eta = cfg.true_beta[0]
                + x.row(i).iter().zip(&cfg.true_beta[1..]).map(|(a, b)| a * b).sum::<f64>();
            math::exp(eta)
        })
        .collect())
}

//! Poisson and negative-binomial (NB2) regression with a log link.
//!
//! Both families are fit by maximum likelihood. Poisson uses Newton–Raphson
//! with step halving from `β = 0`. The negative binomial starts from the
//! Poisson fit, profiles the overdispersion `α` with a bracketing search on
//! `ln α` (so `α` never leaves the open half-line), and finishes with a joint
//! Newton polish over `(β, α)`. Standard errors come from the inverse
//! observed information at the optimum.
//!
//! NB2 log-likelihood of one observation, with `θ = 1/α`:
//!
//! ```text
//! ℓ = lnΓ(y+θ) − lnΓ(θ) − lnΓ(y+1) + y·ln(αλ) − (y+θ)·ln(1+αλ)
//! ```
//!
//! which tends to the Poisson log-likelihood as `α → 0`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetError, FeatureMatrix};
use crate::{linalg, math};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Poisson,
    NegativeBinomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlmSpec {
    pub family: Family,
    pub max_iter: usize,
    /// Convergence threshold on the infinity norm of the score.
    pub tol: f64,
}

impl Default for GlmSpec {
    fn default() -> Self {
        GlmSpec {
            family: Family::Poisson,
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

impl GlmSpec {
    pub fn poisson() -> Self {
        GlmSpec::default()
    }

    pub fn negbin() -> Self {
        GlmSpec {
            family: Family::NegativeBinomial,
            ..GlmSpec::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GlmError {
    #[error("invalid GLM spec: {0}")]
    InvalidSpec(&'static str),
    #[error("empty design matrix")]
    Empty,
    #[error("response must be non-negative")]
    NegativeResponse,
    #[error("design matrix is rank deficient after adding the intercept")]
    RankDeficient,
    #[error("overdispersion estimate diverged (alpha > {0})")]
    AlphaDiverged(f64),
    #[error(transparent)]
    Data(#[from] DatasetError),
}

/// A fitted count regression. `beta[0]` is the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedGlm {
    pub family: Family,
    pub column_names: Vec<String>,
    pub beta: Vec<f64>,
    /// Overdispersion; `None` for Poisson.
    pub alpha: Option<f64>,
    pub loglik: f64,
    /// Standard errors of `beta`.
    pub se: Vec<f64>,
    pub alpha_se: Option<f64>,
    pub aic: f64,
    pub bic: f64,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Infinity norm of the score at the returned parameters.
    pub grad_norm: f64,
    pub note: Option<String>,
}

impl FittedGlm {
    /// Number of estimated parameters counted by the information criteria.
    pub fn n_params(&self) -> usize {
        self.beta.len() + usize::from(self.alpha.is_some())
    }

    pub fn t_stats(&self) -> Vec<f64> {
        self.beta.iter().zip(&self.se).map(|(b, s)| b / s).collect()
    }

    /// Build a model from known coefficients (no fitting statistics).
    pub fn from_coefficients(
        family: Family,
        column_names: Vec<String>,
        beta: Vec<f64>,
        alpha: Option<f64>,
    ) -> FittedGlm {
        let p = beta.len();
        FittedGlm {
            family,
            column_names,
            beta,
            alpha,
            loglik: f64::NAN,
            se: vec![f64::NAN; p],
            alpha_se: None,
            aic: f64::NAN,
            bic: f64::NAN,
            n: 0,
            converged: false,
            iterations: 0,
            grad_norm: f64::NAN,
            note: None,
        }
    }
}

/// `(aic, bic)` for a log-likelihood with `k` parameters and `n` observations.
pub fn information_criteria(loglik: f64, k: usize, n: usize) -> (f64, f64) {
    let k = k as f64;
    (-2.0 * loglik + 2.0 * k, -2.0 * loglik + k * math::ln(n as f64))
}

#[inline]
fn linear_predictor(x: &FeatureMatrix, beta: &[f64], i: usize) -> f64 {
    let row = x.row(i);
    beta[0] + row.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>()
}

fn check_beta(x: &FeatureMatrix, beta: &[f64]) {
    assert_eq!(beta.len(), x.n_cols() + 1, "beta must have p + 1 entries");
}

/// Poisson log-likelihood `Σ(−λ + y·η − ln y!)` at `beta`.
pub fn poisson_loglik(x: &FeatureMatrix, beta: &[f64]) -> f64 {
    check_beta(x, beta);
    let y = x.response();
    (0..x.n_rows())
        .map(|i| {
            let eta = linear_predictor(x, beta, i);
            -math::exp(eta) + y[i] * eta - math::ln_factorial(y[i])
        })
        .sum()
}

/// Poisson log-likelihood at fixed means `lambda`.
pub fn poisson_loglik_at(y: &[f64], lambda: &[f64]) -> f64 {
    y.iter()
        .zip(lambda)
        .map(|(&y, &l)| -l + y * math::ln(l) - math::ln_factorial(y))
        .sum()
}

/// Gradient of [`poisson_loglik`] with respect to `beta`.
pub fn poisson_score(x: &FeatureMatrix, beta: &[f64]) -> Vec<f64> {
    check_beta(x, beta);
    let y = x.response();
    let mut g = vec![0.0; beta.len()];
    for i in 0..x.n_rows() {
        let r = y[i] - math::exp(linear_predictor(x, beta, i));
        accumulate(&mut g, x.row(i), r);
    }
    g
}

#[inline]
fn accumulate(g: &mut [f64], row: &[f64], w: f64) {
    g[0] += w;
    for (gj, xj) in g[1..].iter_mut().zip(row) {
        *gj += w * xj;
    }
}

#[inline]
fn accumulate_outer(h: &mut DMatrix<f64>, row: &[f64], w: f64) {
    let p = row.len() + 1;
    let at = |j: usize| if j == 0 { 1.0 } else { row[j - 1] };
    for a in 0..p {
        let xa = at(a) * w;
        for b in 0..=a {
            h[(a, b)] += xa * at(b);
        }
    }
}

fn symmetrize(h: &mut DMatrix<f64>) {
    let p = h.nrows();
    for a in 0..p {
        for b in 0..a {
            h[(b, a)] = h[(a, b)];
        }
    }
}

/// NB2 log-likelihood at `(beta, alpha)`, `alpha > 0`.
pub fn negbin_loglik(x: &FeatureMatrix, beta: &[f64], alpha: f64) -> f64 {
    check_beta(x, beta);
    if alpha == 0.0 {
        return poisson_loglik(x, beta);
    }
    let y = x.response();
    let theta = 1.0 / alpha;
    let ln_gamma_theta = math::ln_gamma(theta);
    let ln_alpha = math::ln(alpha);
    (0..x.n_rows())
        .map(|i| {
            let eta = linear_predictor(x, beta, i);
            let al = alpha * math::exp(eta);
            math::ln_gamma(y[i] + theta) - ln_gamma_theta - math::ln_factorial(y[i])
                + y[i] * (ln_alpha + eta)
                - (y[i] + theta) * math::ln_1p(al)
        })
        .sum()
}

/// Gradient of [`negbin_loglik`]: `p + 1` entries for `beta`, then `∂ℓ/∂α`.
pub fn negbin_score(x: &FeatureMatrix, beta: &[f64], alpha: f64) -> Vec<f64> {
    check_beta(x, beta);
    let y = x.response();
    let theta = 1.0 / alpha;
    let psi_theta = math::digamma(theta);
    let mut g = vec![0.0; beta.len() + 1];
    let a = beta.len();
    for i in 0..x.n_rows() {
        let lambda = math::exp(linear_predictor(x, beta, i));
        let denom = 1.0 + alpha * lambda;
        let r = (y[i] - lambda) / denom;
        accumulate(&mut g[..a], x.row(i), r);
        let big_a = psi_theta - math::digamma(y[i] + theta) + math::ln_1p(alpha * lambda);
        g[a] += big_a / (alpha * alpha) + r / alpha;
    }
    g
}

/// Hessian of [`negbin_loglik`] over `(beta, alpha)`.
pub fn negbin_hessian(x: &FeatureMatrix, beta: &[f64], alpha: f64) -> DMatrix<f64> {
    check_beta(x, beta);
    let y = x.response();
    let p = beta.len();
    let theta = 1.0 / alpha;
    let psi_theta = math::digamma(theta);
    let tri_theta = math::trigamma(theta);
    let a2 = alpha * alpha;
    let mut h = DMatrix::zeros(p + 1, p + 1);
    let mut hbb = DMatrix::zeros(p, p);
    for i in 0..x.n_rows() {
        let row = x.row(i);
        let lambda = math::exp(linear_predictor(x, beta, i));
        let denom = 1.0 + alpha * lambda;
        let d2 = denom * denom;
        accumulate_outer(&mut hbb, row, -lambda * (1.0 + alpha * y[i]) / d2);
        let cross = -(y[i] - lambda) * lambda / d2;
        h[(p, 0)] += cross;
        for (j, xj) in row.iter().enumerate() {
            h[(p, j + 1)] += cross * xj;
        }
        let big_a = psi_theta - math::digamma(y[i] + theta) + math::ln_1p(alpha * lambda);
        h[(p, p)] += -2.0 * big_a / (a2 * alpha)
            + (math::trigamma(y[i] + theta) - tri_theta) / (a2 * a2)
            + lambda / (a2 * denom)
            - (y[i] - lambda) * (1.0 + 2.0 * alpha * lambda) / (a2 * d2);
    }
    symmetrize(&mut hbb);
    h.view_mut((0, 0), (p, p)).copy_from(&hbb);
    for j in 0..p {
        h[(j, p)] = h[(p, j)];
    }
    h
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn validate(x: &FeatureMatrix, spec: &GlmSpec) -> Result<(), GlmError> {
    if spec.max_iter == 0 {
        return Err(GlmError::InvalidSpec("max_iter must be at least 1"));
    }
    if !(spec.tol > 0.0) {
        return Err(GlmError::InvalidSpec("tol must be positive"));
    }
    if x.n_rows() == 0 {
        return Err(GlmError::Empty);
    }
    if x.response().iter().any(|&y| y < 0.0) {
        return Err(GlmError::NegativeResponse);
    }
    let mut xtx = DMatrix::zeros(x.n_cols() + 1, x.n_cols() + 1);
    for i in 0..x.n_rows() {
        accumulate_outer(&mut xtx, x.row(i), 1.0);
    }
    symmetrize(&mut xtx);
    if linalg::scaled_condition_ratio(&xtx) < 1e-12 {
        return Err(GlmError::RankDeficient);
    }
    Ok(())
}

/// Iteratively maximize `objective` over `beta` with Newton steps from
/// `step(beta) -> (gradient, negative Hessian)`, halving steps that do not
/// increase the objective.
struct NewtonOutcome {
    params: Vec<f64>,
    iterations: usize,
    grad_norm: f64,
    converged: bool,
}

fn newton_maximize<O, S>(
    mut params: Vec<f64>,
    max_iter: usize,
    tol: f64,
    objective: O,
    step: S,
    feasible: impl Fn(&[f64]) -> bool,
) -> NewtonOutcome
where
    O: Fn(&[f64]) -> f64,
    S: Fn(&[f64]) -> (Vec<f64>, DMatrix<f64>),
{
    let mut value = objective(&params);
    let mut iterations = 0;
    while iterations < max_iter {
        let (g, neg_h) = step(&params);
        if inf_norm(&g) <= tol {
            break;
        }
        let Some(dir) = linalg::spd_solve(&neg_h, &g) else {
            break;
        };
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let cand: Vec<f64> = params.iter().zip(&dir).map(|(p, d)| p + t * d).collect();
            if feasible(&cand) {
                let v = objective(&cand);
                if v.is_finite() && v >= value - 1e-13 * (1.0 + value.abs()) {
                    params = cand;
                    value = v;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    let grad_norm = inf_norm(&step(&params).0);
    NewtonOutcome {
        converged: grad_norm <= tol,
        params,
        iterations,
        grad_norm,
    }
}

fn poisson_step(x: &FeatureMatrix, beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let y = x.response();
    let p = beta.len();
    let mut g = vec![0.0; p];
    let mut h = DMatrix::zeros(p, p);
    for i in 0..x.n_rows() {
        let lambda = math::exp(linear_predictor(x, beta, i));
        accumulate(&mut g, x.row(i), y[i] - lambda);
        accumulate_outer(&mut h, x.row(i), lambda);
    }
    symmetrize(&mut h);
    (g, h)
}

/// Fisher-scoring step for `beta` at fixed `alpha`.
fn negbin_beta_step(x: &FeatureMatrix, beta: &[f64], alpha: f64) -> (Vec<f64>, DMatrix<f64>) {
    let y = x.response();
    let p = beta.len();
    let mut g = vec![0.0; p];
    let mut h = DMatrix::zeros(p, p);
    for i in 0..x.n_rows() {
        let lambda = math::exp(linear_predictor(x, beta, i));
        let denom = 1.0 + alpha * lambda;
        accumulate(&mut g, x.row(i), (y[i] - lambda) / denom);
        accumulate_outer(&mut h, x.row(i), lambda / denom);
    }
    symmetrize(&mut h);
    (g, h)
}

fn standard_errors(neg_h: &DMatrix<f64>) -> Vec<f64> {
    match linalg::spd_inverse(neg_h) {
        Some(inv) => (0..inv.nrows()).map(|i| math::sqrt(inv[(i, i)])).collect(),
        None => vec![f64::NAN; neg_h.nrows()],
    }
}

/// Poisson maximum-likelihood fit.
pub fn fit_poisson(x: &FeatureMatrix, spec: &GlmSpec) -> Result<FittedGlm, GlmError> {
    validate(x, spec)?;
    let p = x.n_cols() + 1;
    let out = newton_maximize(
        vec![0.0; p],
        spec.max_iter,
        spec.tol,
        |b| poisson_loglik(x, b),
        |b| poisson_step(x, b),
        |_| true,
    );
    let (_, neg_h) = poisson_step(x, &out.params);
    let loglik = poisson_loglik(x, &out.params);
    let (aic, bic) = information_criteria(loglik, p, x.n_rows());
    Ok(FittedGlm {
        family: Family::Poisson,
        column_names: x.column_names().to_vec(),
        se: standard_errors(&neg_h),
        beta: out.params,
        alpha: None,
        loglik,
        alpha_se: None,
        aic,
        bic,
        n: x.n_rows(),
        converged: out.converged,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        note: None,
    })
}

const ALPHA_MIN: f64 = 1e-8;
const ALPHA_MAX: f64 = 1e6;

/// Negative-binomial (NB2) maximum-likelihood fit over `(β, α)`.
pub fn fit_negbin(x: &FeatureMatrix, spec: &GlmSpec) -> Result<FittedGlm, GlmError> {
    let poisson = fit_poisson(x, spec)?;
    let y = x.response();
    let n = x.n_rows();
    let p = poisson.beta.len();

    // Score in alpha at the boundary: ½Σ[(y − λ)² − y].
    let lambda0 = predict_link(x, &poisson.beta);
    let boundary_score: f64 = y
        .iter()
        .zip(&lambda0)
        .map(|(&y, &l)| 0.5 * ((y - l) * (y - l) - y))
        .sum();
    if boundary_score <= 0.0 {
        let (aic, bic) = information_criteria(poisson.loglik, p + 1, n);
        return Ok(FittedGlm {
            family: Family::NegativeBinomial,
            alpha: Some(0.0),
            aic,
            bic,
            note: Some("alpha at the 0 boundary: equidispersed data, fit equals Poisson".to_string()),
            ..poisson
        });
    }

    // Profile over ln(alpha).
    let fit_beta = |alpha: f64, start: &[f64]| {
        newton_maximize(
            start.to_vec(),
            spec.max_iter,
            spec.tol,
            |b| negbin_loglik(x, b, alpha),
            |b| negbin_beta_step(x, b, alpha),
            |_| true,
        )
        .params
    };
    let profile_score = |alpha: f64, start: &[f64]| {
        let beta = fit_beta(alpha, start);
        let s = negbin_score(x, &beta, alpha)[p];
        (s, beta)
    };

    let ybar = math::mean(y);
    let s2 = math::sample_sd(y);
    let mom = ((s2 * s2 - ybar) / (ybar * ybar)).max(0.0);
    let mut tau = math::ln(mom.clamp(1e-3, 10.0));
    let mut beta = poisson.beta.clone();
    let (mut s, b) = profile_score(math::exp(tau), &beta);
    beta = b;
    // Bracket the root of the profile score.
    let (mut lo, mut hi) = if s > 0.0 {
        let lo = tau;
        loop {
            tau += 1.0;
            if tau > math::ln(ALPHA_MAX) {
                return Err(GlmError::AlphaDiverged(ALPHA_MAX));
            }
            let (sn, b) = profile_score(math::exp(tau), &beta);
            beta = b;
            if sn <= 0.0 {
                break (lo.max(tau - 1.0), tau);
            }
            s = sn;
        }
    } else {
        let hi = tau;
        loop {
            tau -= 1.0;
            if tau < math::ln(ALPHA_MIN) {
                break (math::ln(ALPHA_MIN), hi.min(tau + 1.0));
            }
            let (sn, b) = profile_score(math::exp(tau), &beta);
            beta = b;
            if sn > 0.0 {
                break (tau, hi.min(tau + 1.0));
            }
            s = sn;
        }
    };
    let _ = s;
    for _ in 0..40 {
        if hi - lo < 1e-7 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (sm, b) = profile_score(math::exp(mid), &beta);
        beta = b;
        if sm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha0 = math::exp(0.5 * (lo + hi));
    let mut start = fit_beta(alpha0, &beta);
    start.push(alpha0);

    // Joint Newton polish on (beta, alpha).
    let out = newton_maximize(
        start,
        spec.max_iter,
        spec.tol,
        |t| negbin_loglik(x, &t[..p], t[p]),
        |t| {
            let g = negbin_score(x, &t[..p], t[p]);
            let h = -negbin_hessian(x, &t[..p], t[p]);
            (g, h)
        },
        |t| t[p] > 0.0,
    );
    let params = out.params;
    let alpha = params[p];
    let loglik = negbin_loglik(x, &params[..p], alpha);
    let neg_h = -negbin_hessian(x, &params[..p], alpha);
    let se_all = standard_errors(&neg_h);
    let (aic, bic) = information_criteria(loglik, p + 1, n);
    Ok(FittedGlm {
        family: Family::NegativeBinomial,
        column_names: x.column_names().to_vec(),
        beta: params[..p].to_vec(),
        alpha: Some(alpha),
        loglik,
        se: se_all[..p].to_vec(),
        alpha_se: Some(se_all[p]),
        aic,
        bic,
        n,
        converged: out.converged,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        note: None,
    })
}

/// Fit the family named by `spec`.
pub fn fit(x: &FeatureMatrix, spec: &GlmSpec) -> Result<FittedGlm, GlmError> {
    match spec.family {
        Family::Poisson => fit_poisson(x, spec),
        Family::NegativeBinomial => fit_negbin(x, spec),
    }
}

fn predict_link(x: &FeatureMatrix, beta: &[f64]) -> Vec<f64> {
    (0..x.n_rows())
        .map(|i| math::exp(linear_predictor(x, beta, i)))
        .collect()
}

/// Expected counts `exp(xᵀβ)`.
pub fn predict_mean(model: &FittedGlm, x: &FeatureMatrix) -> Result<Vec<f64>, GlmError> {
    x.check_columns(&model.column_names)?;
    Ok(predict_link(x, &model.beta))
}

/// Where a marginal effect is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalKind {
    /// Average over the sample of `β_k·λ_i`.
    #[default]
    Average,
    /// `β_k·exp(x̄ᵀβ)` at the covariate means.
    AtMeans,
}

/// Marginal effect of each non-intercept covariate on the expected count.
pub fn marginal_effects(
    model: &FittedGlm,
    x: &FeatureMatrix,
    kind: MarginalKind,
) -> Result<Vec<f64>, GlmError> {
    x.check_columns(&model.column_names)?;
    let scale = match kind {
        MarginalKind::Average => math::mean(&predict_link(x, &model.beta)),
        MarginalKind::AtMeans => {
            let means: Vec<f64> = (0..x.n_cols()).map(|j| math::mean(&x.column(j))).collect();
            let eta = model.beta[0]
                + means.iter().zip(&model.beta[1..]).map(|(a, b)| a * b).sum::<f64>();
            math::exp(eta)
        }
    };
    Ok(model.beta[1..].iter().map(|b| b * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn intercept_only(y: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_flat(Vec::new(), Vec::new(), y.to_vec()).unwrap()
    }

    #[test]
    fn intercept_only_poisson_is_log_mean() {
        let m = fit_poisson(&intercept_only(&[1.0, 2.0, 3.0]), &GlmSpec::default()).unwrap();
        assert!(m.converged);
        assert!((m.beta[0] - core::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn loglik_at_fixed_lambda() {
        let ll = poisson_loglik_at(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]);
        assert!((ll - (-4.32603)).abs() < 1e-5, "{ll}");
    }

    #[test]
    fn information_criteria_values() {
        let (aic, bic) = information_criteria(-1470.852, 8, 304);
        assert!((aic - 2957.704).abs() < 0.01);
        assert!((bic - 2987.440).abs() < 0.01);
        let (aic, bic) = information_criteria(0.0, 1, 1);
        assert_eq!((aic, bic), (2.0, 0.0));
    }

    #[test]
    fn predict_constant_coefficients() {
        let x = FeatureMatrix::from_rows(
            vec!["a".to_string()],
            &[vec![1.0], vec![-3.0]],
            vec![0.0, 0.0],
        )
        .unwrap();
        let m = FittedGlm::from_coefficients(Family::Poisson, vec!["a".to_string()], vec![0.0, 0.0], None);
        assert_eq!(predict_mean(&m, &x).unwrap(), vec![1.0, 1.0]);
        let m = FittedGlm::from_coefficients(
            Family::Poisson,
            vec!["a".to_string()],
            vec![core::f64::consts::LN_2, 0.0],
            None,
        );
        for v in predict_mean(&m, &x).unwrap() {
            assert!((v - 2.0).abs() < 1e-15);
        }
        let wrong = FittedGlm::from_coefficients(Family::Poisson, vec!["b".to_string()], vec![0.0, 0.0], None);
        assert!(matches!(predict_mean(&wrong, &x), Err(GlmError::Data(_))));
    }

    #[test]
    fn rank_deficiency_detected() {
        let x = FeatureMatrix::from_rows(
            vec!["a".to_string(), "b".to_string()],
            &[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        assert_eq!(fit_poisson(&x, &GlmSpec::default()).unwrap_err(), GlmError::RankDeficient);
    }

    #[test]
    fn invalid_spec_and_negative_response() {
        let x = intercept_only(&[1.0]);
        let spec = GlmSpec { tol: 0.0, ..GlmSpec::default() };
        assert!(matches!(fit_poisson(&x, &spec), Err(GlmError::InvalidSpec(_))));
        assert_eq!(
            fit_poisson(&intercept_only(&[-1.0]), &GlmSpec::default()).unwrap_err(),
            GlmError::NegativeResponse
        );
    }

    #[test]
    fn equidispersed_data_hits_boundary() {
        // Sample variance below the mean.
        let m = fit_negbin(&intercept_only(&[2.0, 3.0, 2.0, 3.0, 2.0]), &GlmSpec::negbin()).unwrap();
        assert_eq!(m.alpha, Some(0.0));
        assert!(m.note.is_some());
        assert_eq!(m.n_params(), 2);
    }

    #[test]
    fn intercept_only_negbin_matches_mean() {
        let y = [0.0, 1.0, 7.0, 2.0, 15.0, 3.0, 0.0, 9.0];
        let nb = fit_negbin(&intercept_only(&y), &GlmSpec::negbin()).unwrap();
        let po = fit_poisson(&intercept_only(&y), &GlmSpec::default()).unwrap();
        let ybar = math::mean(&y);
        assert!(nb.converged, "{nb:?}");
        assert!(nb.alpha.unwrap() > 0.0);
        assert!((math::exp(nb.beta[0]) - ybar).abs() < 1e-8);
        assert!((math::exp(po.beta[0]) - ybar).abs() < 1e-8);
        assert!(nb.loglik >= po.loglik);
    }
}

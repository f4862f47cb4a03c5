//! Least-squares combination weights: unconstrained, non-negative, or on the
//! probability simplex.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::StackError;
use crate::dataset::FeatureMatrix;
use crate::linalg;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintMode {
    Unconstrained,
    #[default]
    Nonneg,
    /// Non-negative weights summing to one.
    Simplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearStackWeights {
    pub w: Vec<f64>,
    pub intercept: Option<f64>,
    pub mode: ConstraintMode,
}

impl LinearStackWeights {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut acc = self.intercept.unwrap_or(0.0);
        for (w, p) in self.w.iter().zip(row) {
            acc += w * p;
        }
        acc
    }
}

/// Largest column count the exact simplex solver enumerates supports for.
const SIMPLEX_MAX_COLS: usize = 16;

/// Fit combination weights on a meta-feature matrix against its response.
/// With `intercept`, columns and response are centred first so the
/// intercept stays unconstrained in every mode.
pub fn fit_linear_stack(
    meta: &FeatureMatrix,
    mode: ConstraintMode,
    intercept: bool,
) -> Result<LinearStackWeights, StackError> {
    let n = meta.n_rows();
    let l = meta.n_cols();
    if l == 0 || n < l {
        return Err(StackError::Degenerate(alloc::format!(
            "need at least {l} rows for {l} meta columns, got {n}"
        )));
    }
    let cols: Vec<Vec<f64>> = (0..l).map(|j| meta.column(j)).collect();
    if cols.iter().all(|c| c.iter().all(|&v| v == c[0])) {
        return Err(StackError::Degenerate("every meta-feature column is constant".into()));
    }
    let y = meta.response();
    let (col_means, y_mean) = if intercept {
        (
            cols.iter().map(|c| crate::math::mean(c)).collect::<Vec<_>>(),
            crate::math::mean(y),
        )
    } else {
        (vec![0.0; l], 0.0)
    };
    let a = DMatrix::from_fn(n, l, |i, j| cols[j][i] - col_means[j]);
    let b: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let w = match mode {
        ConstraintMode::Unconstrained => linalg::lstsq_min_norm(&a, &b),
        ConstraintMode::Nonneg => nnls(&a, &b),
        ConstraintMode::Simplex => {
            if l > SIMPLEX_MAX_COLS {
                return Err(StackError::Degenerate(alloc::format!(
                    "simplex weights support at most {SIMPLEX_MAX_COLS} columns"
                )));
            }
            simplex_ls(&a, &b)
        }
    };
    let intercept = intercept.then(|| y_mean - w.iter().zip(&col_means).map(|(w, m)| w * m).sum::<f64>());
    Ok(LinearStackWeights { w, intercept, mode })
}

fn residual_gradient(a: &DMatrix<f64>, b: &[f64], w: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let r: Vec<f64> = (0..n)
        .map(|i| b[i] - (0..a.ncols()).map(|j| a[(i, j)] * w[j]).sum::<f64>())
        .collect();
    (0..a.ncols()).map(|j| (0..n).map(|i| a[(i, j)] * r[i]).sum()).collect()
}

fn subset_lstsq(a: &DMatrix<f64>, b: &[f64], cols: &[usize]) -> Vec<f64> {
    let sub = DMatrix::from_fn(a.nrows(), cols.len(), |i, k| a[(i, cols[k])]);
    linalg::lstsq_min_norm(&sub, b)
}

/// Lawson–Hanson active-set non-negative least squares.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let l = a.ncols();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())) * b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE) * a.nrows() as f64;
    let mut w = vec![0.0; l];
    let mut passive = vec![false; l];
    for _ in 0..3 * l + 10 {
        let grad = residual_gradient(a, b, &w);
        let pick = (0..l)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]).then(j.cmp(&i)));
        let Some(j) = pick.filter(|&j| grad[j] > tol) else { break };
        passive[j] = true;
        for _ in 0..3 * l + 10 {
            let set: Vec<usize> = (0..l).filter(|&k| passive[k]).collect();
            let s_sub = subset_lstsq(a, b, &set);
            let mut s = vec![0.0; l];
            for (k, &c) in set.iter().enumerate() {
                s[c] = s_sub[k];
            }
            if set.iter().all(|&c| s[c] > 0.0) {
                w = s;
                break;
            }
            let mut step = 1.0f64;
            for &c in &set {
                if s[c] <= 0.0 {
                    let denom = w[c] - s[c];
                    if denom > 0.0 {
                        step = step.min(w[c] / denom);
                    }
                }
            }
            for k in 0..l {
                w[k] += step * (s[k] - w[k]);
            }
            for &c in &set {
                if w[c] <= tol.max(0.0) {
                    w[c] = 0.0;
                    passive[c] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    w
}

fn objective(a: &DMatrix<f64>, b: &[f64], w: &[f64]) -> f64 {
    (0..a.nrows())
        .map(|i| {
            let r = b[i] - (0..a.ncols()).map(|j| a[(i, j)] * w[j]).sum::<f64>();
            r * r
        })
        .sum()
}

/// Least squares on the simplex by enumerating supports: for each subset the
/// equality-constrained solution comes from its KKT system; the best
/// non-negative one wins.
pub(crate) fn simplex_ls(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let l = a.ncols();
    let gram = a.transpose() * a;
    let atb: Vec<f64> = (0..l).map(|j| (0..a.nrows()).map(|i| a[(i, j)] * b[i]).sum()).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1u32 << l) {
        let set: Vec<usize> = (0..l).filter(|&j| mask & (1 << j) != 0).collect();
        let m = set.len();
        let kkt = DMatrix::from_fn(m + 1, m + 1, |r, c| match (r < m, c < m) {
            (true, true) => gram[(set[r], set[c])],
            (true, false) | (false, true) => 1.0,
            (false, false) => 0.0,
        });
        let mut rhs: Vec<f64> = set.iter().map(|&j| atb[j]).collect();
        rhs.push(1.0);
        let sol = linalg::lstsq_min_norm(&kkt, &rhs);
        if sol[..m].iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut w = vec![0.0; l];
        for (k, &j) in set.iter().enumerate() {
            w[j] = sol[k].max(0.0);
        }
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            continue;
        }
        for v in &mut w {
            *v /= total;
        }
        let f = objective(a, b, &w);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, w));
        }
    }
    best.map(|(_, w)| w).unwrap_or_else(|| vec![1.0 / l as f64; l])
}

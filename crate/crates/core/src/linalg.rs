//! Small dense linear algebra on top of `nalgebra`.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

/// Solve `a·x = b` for symmetric positive definite `a`.
pub(crate) fn spd_solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let chol = a.clone().cholesky()?;
    let x = chol.solve(&DVector::from_column_slice(b));
    x.iter().all(|v| v.is_finite()).then(|| x.iter().copied().collect())
}

/// Inverse of a symmetric positive definite matrix.
pub(crate) fn spd_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let inv = a.clone().cholesky()?.inverse();
    inv.iter().all(|v| v.is_finite()).then_some(inv)
}

/// Ratio of smallest to largest eigenvalue of the unit-diagonal rescaling of
/// a symmetric positive semidefinite matrix. Zero diagonal entries give 0.
pub(crate) fn scaled_condition_ratio(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    if d.iter().any(|&v| v <= 0.0) {
        return 0.0;
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / libm::sqrt(d[i] * d[j]));
    let eig = scaled.symmetric_eigen();
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi <= 0.0 {
        0.0
    } else {
        lo.max(0.0) / hi
    }
}

/// Minimum-norm least-squares solution of `a·x ≈ b` via SVD.
pub(crate) fn lstsq_min_norm(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let eps = smax * f64::EPSILON * (a.nrows().max(a.ncols()) as f64);
    let x = svd
        .solve(&DVector::from_column_slice(b), eps)
        .expect("u and v^T were computed");
    x.iter().copied().collect()
}

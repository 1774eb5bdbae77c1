//! Small dense/banded helpers used by the operator and the integrator.

/// Euclidean dot product (H-weights are applied by callers).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Solve a symmetric tridiagonal system with the Thomas algorithm.
///
/// `diag` has length n, `off` length n-1 (sub- and super-diagonal are equal).
/// Stable without pivoting for the SPD systems this crate produces.
pub fn thomas_solve(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    if n == 0 {
        return Vec::new();
    }
    debug_assert_eq!(off.len(), n.saturating_sub(1));
    let mut c = vec![0.0; n.saturating_sub(1)];
    let mut d = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag[0];
    if n > 1 {
        c[0] = off[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

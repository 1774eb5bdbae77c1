//! The linear operator `A` applied as a matrix-vector product.
//!
//! `A` must be symmetric positive-semidefinite with respect to the H-inner
//! product (a uniform weight, so matrix symmetry suffices). The shifted
//! system `(A + I) w = b` realizes the dual norm and is solved directly:
//! Thomas for the banded wave operator, Cholesky for dense instances.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Dyn};

use crate::linalg::{self, thomas_solve};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum Operator {
    /// `A = 0` (pure convex-F dynamics).
    Zero { dim: usize },
    /// Diagonal with nonnegative entries; eigenbasis is the coordinate axes.
    Diagonal { eigs: Vec<f64> },
    /// One-dimensional Dirichlet Laplacian `(1/h^2) tridiag(-1, 2, -1)` on
    /// `n` interior points of `(0, 1)`, `h = 1/(n+1)`.
    WaveLaplacian { n_interior: usize },
    /// General symmetric matrix.
    Dense(DenseOperator),
}

#[derive(Debug, Clone)]
pub struct DenseOperator {
    dim: usize,
    /// Row-major entries.
    entries: Vec<f64>,
    shifted_cholesky: OnceLock<nalgebra::Cholesky<f64, Dyn>>,
    eigen: OnceLock<(Vec<f64>, Vec<Vec<f64>>)>,
}

impl Operator {
    pub fn zero(dim: usize) -> Self {
        Operator::Zero { dim }
    }

    pub fn diagonal(eigs: Vec<f64>) -> Result<Self> {
        if eigs.is_empty() {
            return Err(Error::invalid("diagonal operator needs at least one entry"));
        }
        if eigs.iter().any(|&l| l < 0.0 || !l.is_finite()) {
            return Err(Error::invalid("diagonal operator entries must be nonnegative"));
        }
        Ok(Operator::Diagonal { eigs })
    }

    pub fn identity(dim: usize) -> Self {
        Operator::Diagonal { eigs: vec![1.0; dim] }
    }

    pub fn wave_laplacian(n_interior: usize) -> Result<Self> {
        if n_interior < 2 {
            return Err(Error::invalid("wave operator needs at least 2 interior points"));
        }
        Ok(Operator::WaveLaplacian { n_interior })
    }

    /// Build from row-major entries; rejects asymmetry beyond rounding.
    pub fn dense(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "dense operator needs {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let scale = linalg::max_abs(&entries).max(1.0);
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (entries[i * dim + j] - entries[j * dim + i]).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!(
                        "dense operator is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Operator::Dense(DenseOperator {
            dim,
            entries,
            shifted_cholesky: OnceLock::new(),
            eigen: OnceLock::new(),
        }))
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Zero { dim } => *dim,
            Operator::Diagonal { eigs } => eigs.len(),
            Operator::WaveLaplacian { n_interior } => *n_interior,
            Operator::Dense(d) => d.dim,
        }
    }

    /// Spatial step of the wave discretization, if this is the wave operator.
    pub fn wave_step(&self) -> Option<f64> {
        match self {
            Operator::WaveLaplacian { n_interior } => Some(1.0 / (*n_interior as f64 + 1.0)),
            _ => None,
        }
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        match self {
            Operator::Zero { .. } => out.fill(0.0),
            Operator::Diagonal { eigs } => {
                for i in 0..v.len() {
                    out[i] = eigs[i] * v[i];
                }
            }
            Operator::WaveLaplacian { n_interior } => {
                let n = *n_interior;
                let inv_h2 = {
                    let h = 1.0 / (n as f64 + 1.0);
                    1.0 / (h * h)
                };
                for i in 0..n {
                    let left = if i > 0 { v[i - 1] } else { 0.0 };
                    let right = if i + 1 < n { v[i + 1] } else { 0.0 };
                    out[i] = inv_h2 * (2.0 * v[i] - left - right);
                }
            }
            Operator::Dense(d) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &d.entries[i * d.dim..(i + 1) * d.dim];
                    *o = linalg::dot(row, v);
                }
            }
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(v, &mut out);
        out
    }

    /// Solve `(A + I) w = rhs` by a direct method.
    pub fn shifted_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        debug_assert_eq!(rhs.len(), self.dim());
        match self {
            Operator::Zero { .. } => Ok(rhs.to_vec()),
            Operator::Diagonal { eigs } => {
                Ok(rhs.iter().zip(eigs).map(|(r, l)| r / (1.0 + l)).collect())
            }
            Operator::WaveLaplacian { n_interior } => {
                let n = *n_interior;
                let h = 1.0 / (n as f64 + 1.0);
                let inv_h2 = 1.0 / (h * h);
                let diag = vec![2.0 * inv_h2 + 1.0; n];
                let off = vec![-inv_h2; n.saturating_sub(1)];
                Ok(thomas_solve(&diag, &off, rhs))
            }
            Operator::Dense(d) => {
                let chol = d.shifted_cholesky.get_or_init(|| {
                    let mut m = DMatrix::from_row_slice(d.dim, d.dim, &d.entries);
                    for i in 0..d.dim {
                        m[(i, i)] += 1.0;
                    }
                    // A is PSD so A + I is SPD; failure here means the
                    // operator was invalid, which the guard below reports.
                    nalgebra::Cholesky::new(m.clone()).unwrap_or_else(|| {
                        nalgebra::Cholesky::new(DMatrix::identity(d.dim, d.dim)).unwrap()
                    })
                });
                let b = DVector::from_column_slice(rhs);
                let w = chol.solve(&b);
                let w: Vec<f64> = w.iter().copied().collect();
                // Guard against a silently wrong factorization.
                let mut residual = self.apply(&w);
                for i in 0..w.len() {
                    residual[i] += w[i] - rhs[i];
                }
                let scale = linalg::max_abs(rhs).max(1e-300);
                if linalg::max_abs(&residual) > 1e-10 * scale {
                    return Err(Error::LinearSolve(format!(
                        "shifted solve residual {:.3e} exceeds 1e-10 relative",
                        linalg::max_abs(&residual) / scale
                    )));
                }
                Ok(w)
            }
        }
    }

    /// Exact upper bound on `lambda_max(A)` where the structure provides one.
    pub fn lambda_max_exact(&self) -> Option<f64> {
        match self {
            Operator::Zero { .. } => Some(0.0),
            Operator::Diagonal { eigs } => Some(eigs.iter().fold(0.0_f64, |m, &l| m.max(l))),
            Operator::WaveLaplacian { n_interior } => {
                let h = 1.0 / (*n_interior as f64 + 1.0);
                Some(4.0 / (h * h))
            }
            Operator::Dense(_) => None,
        }
    }

    /// A spanning set of eigenvector directions (not normalized).
    pub fn eigen_directions(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        match self {
            Operator::Zero { .. } | Operator::Diagonal { .. } => (0..n)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    e
                })
                .collect(),
            Operator::WaveLaplacian { n_interior } => {
                let m = *n_interior;
                let h = 1.0 / (m as f64 + 1.0);
                (1..=m)
                    .map(|k| {
                        (1..=m)
                            .map(|i| (k as f64 * std::f64::consts::PI * i as f64 * h).sin())
                            .collect()
                    })
                    .collect()
            }
            Operator::Dense(d) => {
                let (_, vectors) = d.eigen.get_or_init(|| {
                    let m = DMatrix::from_row_slice(d.dim, d.dim, &d.entries);
                    let se = nalgebra::SymmetricEigen::new(m);
                    let values: Vec<f64> = se.eigenvalues.iter().copied().collect();
                    let vectors: Vec<Vec<f64>> = (0..d.dim)
                        .map(|j| se.eigenvectors.column(j).iter().copied().collect())
                        .collect();
                    (values, vectors)
                });
                vectors.clone()
            }
        }
    }
}

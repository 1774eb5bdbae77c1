//! The three norms of the embedding chain `V -> H -> V'` on `R^n`.
//!
//! With `S = A + I` (in the H-inner product):
//!
//! * `|v|_H^2   = h * sum v_i^2`
//! * `||v||_V^2  = a(v, v) + |v|_H^2`
//! * `||v||_V'^2 = <S^{-1} v, v>_H`
//!
//! In the eigenbasis of `A` these are `sum c_i^2`, `sum (1+l_i) c_i^2`, and
//! `sum c_i^2 / (1+l_i)`, which forces `||v||_V' <= |v|_H <= ||v||_V` and, by
//! Cauchy-Schwarz, `|v|_H^2 <= ||v||_V' ||v||_V` (the interpolation property
//! with exponent 1/2 and constant 1).

use crate::linalg;
use crate::problem::convex::ConvexProblem;
use crate::rng::SplitMix64;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NormTriple<'p> {
    problem: &'p ConvexProblem,
    /// Maximum allowed relative residual of the `(A+I) w = v` solve.
    solve_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum NormKind {
    H,
    V,
    VPrime,
}

impl<'p> NormTriple<'p> {
    pub fn new(problem: &'p ConvexProblem) -> Self {
        NormTriple { problem, solve_tol: 1e-10 }
    }

    pub fn problem(&self) -> &ConvexProblem {
        self.problem
    }

    pub fn h_norm(&self, v: &[f64]) -> f64 {
        self.problem.h_norm(v)
    }

    /// `||v||_V = sqrt(a(v,v) + |v|_H^2)`.
    pub fn v_norm(&self, v: &[f64]) -> f64 {
        let a = self.problem.bilinear(v, v);
        (a + self.problem.h_inner(v, v)).max(0.0).sqrt()
    }

    /// `||v||_V' = sqrt(<w, v>_H)` where `(A + I) w = v`.
    pub fn vprime_norm(&self, v: &[f64]) -> Result<f64> {
        let w = self.problem.operator().shifted_solve(v)?;
        // Residual guard: cannot trip for the SPD systems built here, but a
        // silent factorization bug must not corrupt diagnostics. Denormal
        // inputs cannot carry full relative precision and are numerically
        // zero for every consumer, so they skip the check.
        let mut residual = self.problem.operator().apply(&w);
        for i in 0..w.len() {
            residual[i] += w[i] - v[i];
        }
        let scale = linalg::max_abs(v);
        if scale > 1e-280 && linalg::max_abs(&residual) > self.solve_tol * scale {
            return Err(Error::LinearSolve(format!(
                "dual-norm solve residual {:.3e} above {:.1e} relative",
                linalg::max_abs(&residual) / scale,
                self.solve_tol
            )));
        }
        Ok(self.problem.h_inner(&w, v).max(0.0).sqrt())
    }

    pub fn norm(&self, kind: NormKind, v: &[f64]) -> Result<f64> {
        Ok(match kind {
            NormKind::H => self.h_norm(v),
            NormKind::V => self.v_norm(v),
            NormKind::VPrime => self.vprime_norm(v)?,
        })
    }

    /// Empirical interpolation constant: the maximum of
    /// `|v|_H / (||v||_V'^{1/2} ||v||_V^{1/2})` over `m` seeded random unit
    /// vectors and all eigenvector directions of `A`.
    pub fn interpolation_constant(&self, samples: usize) -> Result<f64> {
        let n = self.problem.dim();
        let mut rng = SplitMix64::new(0x1e7a);
        let mut worst: f64 = 0.0;
        let mut probe = |v: &[f64]| -> Result<()> {
            let h = self.h_norm(v);
            if h == 0.0 {
                return Ok(());
            }
            let vp = self.vprime_norm(v)?;
            let vn = self.v_norm(v);
            let ratio = h / (vp.sqrt() * vn.sqrt());
            if ratio > worst {
                worst = ratio;
            }
            Ok(())
        };
        for direction in self.problem.operator().eigen_directions() {
            probe(&direction)?;
        }
        for _ in 0..samples.max(1) {
            let v = rng.unit_vector(n, self.problem.mass_weight());
            probe(&v)?;
        }
        Ok(worst)
    }
}

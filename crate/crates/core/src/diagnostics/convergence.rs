//! Convergence detectors: Cauchy behaviour of the trajectory, membership of
//! the limit in `arg min Phi`, and existence of the anchor limit.

use crate::linalg;
use crate::problem::{ConvexProblem, NormKind, NormTriple};
use crate::{Error, Result};

use super::record::EnergyRecord;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CauchyReport {
    pub norm: NormKind,
    /// Max pairwise distance between checkpoints in the final window.
    pub max_distance: f64,
    pub tolerance: f64,
    pub converged: bool,
}

/// Strong-convergence surrogate: the sup of pairwise distances between
/// checkpoints in `[T/2, T]`, in the requested norm, against a tolerance
/// relative to the final state's size.
pub fn cauchy_check(
    record: &EnergyRecord,
    problem: &ConvexProblem,
    norm: NormKind,
) -> Result<CauchyReport> {
    let t_end = record.t_end();
    let window: Vec<&(f64, Vec<f64>, Vec<f64>)> = record
        .checkpoints
        .iter()
        .filter(|(t, _, _)| *t >= 0.5 * t_end)
        .collect();
    if window.len() < 4 {
        return Err(Error::Precondition(format!(
            "cauchy check needs >= 4 checkpoints in [T/2, T], found {}",
            window.len()
        )));
    }
    let norms = NormTriple::new(problem);
    let last_u = &window.last().unwrap().1;
    let scale = norms.norm(norm, last_u)?;
    let tolerance = 1e-3 * (1.0 + scale);

    let mut max_distance = 0.0_f64;
    for i in 0..window.len() {
        for j in (i + 1)..window.len() {
            let diff = linalg::sub(&window[i].1, &window[j].1);
            let d = norms.norm(norm, &diff)?;
            if d > max_distance {
                max_distance = d;
            }
        }
    }
    Ok(CauchyReport { norm, max_distance, tolerance, converged: max_distance <= tolerance })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LimitCandidate {
    /// `Phi(u_final) - Phi*`.
    pub phi_gap: f64,
    /// `||grad Phi(u_final)||_{V'}`.
    pub grad_vprime: f64,
    pub member: bool,
}

/// Is the final state a minimizer? Both the potential gap and the dual
/// gradient norm must vanish at scale-relative tolerance.
pub fn limit_candidate_check(problem: &ConvexProblem, u_final: &[f64]) -> Result<LimitCandidate> {
    let phi_gap = problem.phi(u_final)? - problem.phi_star();
    let grad = problem.grad_phi(u_final)?;
    let grad_vprime = NormTriple::new(problem).vprime_norm(&grad)?;
    let tol = 1e-6 * (1.0 + problem.phi_star().abs());
    Ok(LimitCandidate {
        phi_gap,
        grad_vprime,
        member: phi_gap.abs() <= tol && grad_vprime <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AnchorLimitReport {
    /// Oscillation of `p` over `[T/2, T]`.
    pub oscillation: f64,
    pub tolerance: f64,
    pub limit_exists: bool,
}

/// Existence of `lim p(t)`: the oscillation of the anchor over the final
/// window must be small relative to its terminal value.
pub fn anchor_limit_check(record: &EnergyRecord) -> Result<AnchorLimitReport> {
    let t_end = record.t_end();
    let first_positive = record
        .t
        .iter()
        .copied()
        .find(|&t| t > 0.0)
        .ok_or_else(|| Error::Precondition("record has no positive times".into()))?;
    if t_end < 100.0 * first_positive {
        return Err(Error::Precondition(format!(
            "anchor limit check needs >= 2 decades of time, got [{first_positive}, {t_end}]"
        )));
    }
    let start = record.index_at(0.5 * t_end);
    let window = &record.anchor[start..];
    if window.is_empty() {
        return Err(Error::Precondition("anchor window is empty".into()));
    }
    let max = window.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let min = window.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let p_end = *record.anchor.last().unwrap();
    let oscillation = max - min;
    let tolerance = 0.05 * (1.0 + p_end);
    Ok(AnchorLimitReport { oscillation, tolerance, limit_exists: oscillation <= tolerance })
}

//! Damping schedules `gamma(t)` and their hypothesis checks.
//!
//! Every schedule declares `(K, alpha, t0)`. The two hypotheses the decay
//! statements rest on are
//!
//! * (lower bound)  `gamma(t) * (1+t)^alpha >= K` for `t >= t0`,
//! * (monotonicity) `t -> (1+t)^alpha * gamma(t)` nonincreasing on `t >= t0`,
//!
//! and `check_hypotheses` verifies both on an arbitrary grid.

use crate::{Error, Result};

/// Relative slack for grid hypothesis checks; covers rounding in
/// `(1+t)^alpha * gamma(t)` when the product is constant by construction.
const GRID_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum DampingKind {
    /// `gamma(t) = K (1+t)^{-alpha}`.
    Power,
    /// `gamma(t) = scale * K (1+t)^{-alpha}` with `scale >= 1`.
    ScaledPower { scale: f64 },
    /// Piecewise-linear interpolation of `(t, gamma)` pairs; constant beyond
    /// the table ends.
    Tabulated { grid: Vec<(f64, f64)> },
}

#[derive(Debug, Clone)]
pub struct DampingSchedule {
    kind: DampingKind,
    k: f64,
    alpha: f64,
    t0: f64,
}

/// Outcome of checking one hypothesis on a grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct HypothesisCheck {
    pub holds: bool,
    /// First grid time at which the hypothesis fails.
    pub first_violation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DampingReport {
    pub lower_bound: HypothesisCheck,
    pub product_nonincreasing: HypothesisCheck,
}

impl DampingReport {
    pub fn all_hold(&self) -> bool {
        self.lower_bound.holds && self.product_nonincreasing.holds
    }
}

impl DampingSchedule {
    fn validate_declared(k: f64, alpha: f64, t0: f64) -> Result<()> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::invalid(format!("damping strength K must be positive, got {k}")));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::invalid(format!(
                "damping exponent alpha must lie in [0, 1), got {alpha}"
            )));
        }
        if !(t0 >= 0.0) || !t0.is_finite() {
            return Err(Error::invalid(format!("onset time t0 must be nonnegative, got {t0}")));
        }
        Ok(())
    }

    /// `gamma(t) = K (1+t)^{-alpha}`.
    pub fn power(k: f64, alpha: f64, t0: f64) -> Result<Self> {
        Self::validate_declared(k, alpha, t0)?;
        Ok(DampingSchedule { kind: DampingKind::Power, k, alpha, t0 })
    }

    /// `gamma(t) = scale * K (1+t)^{-alpha}`, `scale >= 1`.
    pub fn scaled_power(k: f64, alpha: f64, t0: f64, scale: f64) -> Result<Self> {
        Self::validate_declared(k, alpha, t0)?;
        if !(scale >= 1.0) || !scale.is_finite() {
            return Err(Error::invalid(format!("scale must be >= 1, got {scale}")));
        }
        Ok(DampingSchedule { kind: DampingKind::ScaledPower { scale }, k, alpha, t0 })
    }

    /// Tabulated `gamma` with declared `(K, alpha, t0)` for hypothesis checks.
    pub fn tabulated(k: f64, alpha: f64, t0: f64, grid: Vec<(f64, f64)>) -> Result<Self> {
        Self::validate_declared(k, alpha, t0)?;
        if grid.is_empty() {
            return Err(Error::invalid("tabulated damping needs at least one (t, gamma) pair"));
        }
        for w in grid.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid("tabulated damping grid times must be strictly increasing"));
            }
        }
        if grid.iter().any(|&(t, g)| t < 0.0 || g < 0.0 || !t.is_finite() || !g.is_finite()) {
            return Err(Error::invalid("tabulated damping requires t >= 0 and gamma >= 0"));
        }
        Ok(DampingSchedule { kind: DampingKind::Tabulated { grid }, k, alpha, t0 })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn kind(&self) -> &DampingKind {
        &self.kind
    }

    /// Effective strength of the power law actually evaluated:
    /// `K` for `power`, `scale * K` for `scaled_power`.
    pub fn effective_k(&self) -> Option<f64> {
        match self.kind {
            DampingKind::Power => Some(self.k),
            DampingKind::ScaledPower { scale } => Some(scale * self.k),
            DampingKind::Tabulated { .. } => None,
        }
    }

    /// Evaluate `gamma(t)`; exact for every family (no quadrature).
    pub fn gamma(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match &self.kind {
            DampingKind::Power => self.k * (1.0 + t).powf(-self.alpha),
            DampingKind::ScaledPower { scale } => scale * self.k * (1.0 + t).powf(-self.alpha),
            DampingKind::Tabulated { grid } => {
                if t <= grid[0].0 {
                    return grid[0].1;
                }
                let last = grid[grid.len() - 1];
                if t >= last.0 {
                    return last.1;
                }
                let idx = grid.partition_point(|&(ti, _)| ti <= t);
                let (t1, g1) = grid[idx - 1];
                let (t2, g2) = grid[idx];
                g1 + (g2 - g1) * (t - t1) / (t2 - t1)
            }
        }
    }

    /// Check both hypotheses on a sorted grid of times.
    pub fn check_hypotheses(&self, grid: &[f64]) -> Result<DampingReport> {
        if grid.is_empty() {
            return Err(Error::invalid("hypothesis check needs a nonempty grid"));
        }
        if grid.iter().any(|&t| t < 0.0) {
            return Err(Error::invalid("hypothesis check grid times must be nonnegative"));
        }
        if grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("hypothesis check grid must be sorted"));
        }

        let mut lower = HypothesisCheck { holds: true, first_violation: None };
        let mut mono = HypothesisCheck { holds: true, first_violation: None };

        let product = |t: f64| (1.0 + t).powf(self.alpha) * self.gamma(t);

        let mut prev: Option<(f64, f64)> = None;
        for &t in grid {
            if t < self.t0 {
                continue;
            }
            let p = product(t);
            if lower.holds && p < self.k * (1.0 - GRID_TOL) {
                lower = HypothesisCheck { holds: false, first_violation: Some(t) };
            }
            if let Some((_, p_prev)) = prev {
                if mono.holds && p > p_prev * (1.0 + GRID_TOL) + GRID_TOL {
                    mono = HypothesisCheck { holds: false, first_violation: Some(t) };
                }
            }
            prev = Some((t, p));
        }

        Ok(DampingReport { lower_bound: lower, product_nonincreasing: mono })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, t_max: f64) -> Vec<f64> {
        (0..=n).map(|i| t_max * i as f64 / n as f64).collect()
    }

    #[test]
    fn gamma_eval_power() {
        let s = DampingSchedule::power(1.0, 0.5, 0.0).unwrap();
        assert_eq!(s.gamma(0.0), 1.0);
        assert!((s.gamma(3.0) - 0.5).abs() < 1e-15);
        let c = DampingSchedule::power(2.0, 0.0, 0.0).unwrap();
        assert_eq!(c.gamma(10.0), 2.0);
    }

    #[test]
    fn alpha_one_rejected() {
        assert!(DampingSchedule::power(1.0, 1.0, 0.0).is_err());
        assert!(DampingSchedule::power(1.0, -0.1, 0.0).is_err());
        assert!(DampingSchedule::power(0.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn power_family_passes_both_hypotheses() {
        let s = DampingSchedule::power(1.0, 0.5, 0.0).unwrap();
        let r = s.check_hypotheses(&grid(200, 50.0)).unwrap();
        assert!(r.all_hold(), "{r:?}");
    }

    #[test]
    fn mismatched_declaration_fails_lower_bound() {
        // gamma(t) = 1/(1+t), declared (K=1, alpha=0.5): product (1+t)^{-0.5} < 1
        // for any t > 0.
        let table: Vec<(f64, f64)> = (0..=1000).map(|i| {
            let t = i as f64 * 0.05;
            (t, 1.0 / (1.0 + t))
        }).collect();
        let s = DampingSchedule::tabulated(1.0, 0.5, 0.0, table).unwrap();
        let r = s.check_hypotheses(&grid(100, 40.0)).unwrap();
        assert!(!r.lower_bound.holds);
        let first = r.lower_bound.first_violation.unwrap();
        assert!(first > 0.0 && first <= 0.8, "violation at {first}");
    }

    #[test]
    fn scaled_power_passes_with_margin() {
        // gamma = 2 (1+t)^{-0.3} declared (K=1, alpha=0.3): product constant 2 >= 1.
        let s = DampingSchedule::scaled_power(1.0, 0.3, 0.0, 2.0).unwrap();
        let r = s.check_hypotheses(&grid(100, 30.0)).unwrap();
        assert!(r.all_hold());
    }

    #[test]
    fn empty_grid_is_input_error() {
        let s = DampingSchedule::power(1.0, 0.5, 0.0).unwrap();
        assert!(s.check_hypotheses(&[]).is_err());
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let s = DampingSchedule::tabulated(1.0, 0.0, 0.0, vec![(0.0, 2.0), (2.0, 4.0)]).unwrap();
        assert_eq!(s.gamma(1.0), 3.0);
        assert_eq!(s.gamma(5.0), 4.0); // constant extension
    }
}

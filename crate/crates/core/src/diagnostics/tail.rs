//! The source tail `int_t^inf |g(s)|^2 / (4 gamma(s)) ds` entering the
//! modified energy.
//!
//! For power-family damping the integrand has a closed form for power
//! sources, an elementary closed form for exponential sources at `alpha = 0`,
//! and quadrature with an analytic remainder otherwise. Modulated sources
//! split `sin^2` into a closed power part and an oscillatory part summed
//! over sign-change arches with series acceleration.

use crate::problem::{DampingSchedule, SourceFamily, SourceTerm};
use crate::quad;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum TailModel {
    /// Zero source: the tail vanishes identically.
    Zero,
    /// `tail(t) = coef * (1+t)^expo`, `expo < 0`.
    PowerClosed { coef: f64, expo: f64 },
    /// `tail(t) = coef * e^{-rate t}` (constant damping, exponential source).
    ExpClosed { coef: f64, rate: f64 },
    /// Power damping with `alpha > 0` and exponential source: quadrature on
    /// a finite window plus an integration-by-parts remainder.
    ExpQuadrature { coef: f64, alpha: f64, rate2: f64 },
    /// Power damping with modulated source (`q = alpha - 2 beta < -1`).
    Modulated { coef: f64, q: f64, omega: f64 },
    /// No finite tail (divergent integral or unsupported schedule family).
    Unavailable { reason: String },
}

impl TailModel {
    pub fn build(schedule: &DampingSchedule, source: &SourceTerm) -> TailModel {
        if source.is_zero() {
            return TailModel::Zero;
        }
        let k_eff = match schedule.effective_k() {
            Some(k) => k,
            None => {
                return TailModel::Unavailable {
                    reason: "modified energy needs a power-family damping schedule".into(),
                }
            }
        };
        let alpha = schedule.alpha();
        match source.family() {
            SourceFamily::Zero => TailModel::Zero,
            SourceFamily::PowerDecay { c, beta } => {
                // integrand c^2 (1+s)^{alpha - 2 beta} / (4 K)
                let q = alpha - 2.0 * beta;
                if q >= -1.0 {
                    TailModel::Unavailable {
                        reason: format!(
                            "tail integral diverges: alpha - 2 beta = {q} >= -1; use the plain energy"
                        ),
                    }
                } else {
                    TailModel::PowerClosed {
                        coef: c * c / (4.0 * k_eff * (-q - 1.0)),
                        expo: q + 1.0,
                    }
                }
            }
            SourceFamily::ExpDecay { c, rate } => {
                if alpha == 0.0 {
                    TailModel::ExpClosed {
                        coef: c * c / (8.0 * rate * k_eff),
                        rate: 2.0 * rate,
                    }
                } else {
                    TailModel::ExpQuadrature {
                        coef: c * c / (4.0 * k_eff),
                        alpha,
                        rate2: 2.0 * rate,
                    }
                }
            }
            SourceFamily::ModulatedPower { c, beta, omega } => {
                let q = alpha - 2.0 * beta;
                if q >= -1.0 {
                    TailModel::Unavailable {
                        reason: format!(
                            "tail integral diverges: alpha - 2 beta = {q} >= -1; use the plain energy"
                        ),
                    }
                } else {
                    TailModel::Modulated { coef: c * c / (4.0 * k_eff), q, omega: *omega }
                }
            }
        }
    }

    pub fn is_available(&self) -> bool {
        !matches!(self, TailModel::Unavailable { .. })
    }

    pub fn evaluate(
        &self,
        _schedule: &DampingSchedule,
        _source: &SourceTerm,
        t: f64,
    ) -> Result<f64> {
        match self {
            TailModel::Zero => Ok(0.0),
            TailModel::PowerClosed { coef, expo } => Ok(coef * (1.0 + t).powf(*expo)),
            TailModel::ExpClosed { coef, rate } => Ok(coef * (-rate * t).exp()),
            TailModel::ExpQuadrature { coef, alpha, rate2 } => {
                let a = *rate2;
                let r = *alpha;
                let f = |s: f64| (1.0 + s).powf(r) * (-a * s).exp();
                let t_peak = (r / a - 1.0).max(t);
                let t_cut = t_peak + (80.0 + 5.0 * r) / a;
                let body = quad::adaptive_simpson(&f, t, t_cut, 1e-11, 1e-300);
                Ok(coef * (body + quad::exp_power_tail_bound(r, a, t_cut)))
            }
            TailModel::Modulated { coef, q, omega } => {
                // sin^2 = (1 - cos 2 w s)/2: closed power part minus an
                // oscillatory part summed over arches of cos(2 w s).
                let power_part = (1.0 + t).powf(q + 1.0) / (-q - 1.0);
                let osc = oscillatory_cos_tail(*q, *omega, t);
                Ok(coef * 0.5 * (power_part - osc))
            }
            TailModel::Unavailable { reason } => Err(Error::DivergentIntegral(reason.clone())),
        }
    }
}

/// `int_t^inf (1+s)^q cos(2 omega s) ds` for `q < -1` by summing the
/// alternating arch contributions with iterated averaging.
fn oscillatory_cos_tail(q: f64, omega: f64, t: f64) -> f64 {
    let f = |s: f64| (1.0 + s).powf(q) * (2.0 * omega * s).cos();
    // Zeros of cos(2 w s) at s = (pi/2 + k pi) / (2 w).
    let half_arch = std::f64::consts::FRAC_PI_2 / (2.0 * omega);
    let k0 = ((t / half_arch - 1.0) / 2.0).ceil().max(0.0);
    let mut boundary = (2.0 * k0 + 1.0) * half_arch;
    if boundary <= t {
        boundary += 2.0 * half_arch;
    }
    let head = quad::adaptive_simpson(&f, t, boundary, 1e-11, 1e-300);
    let mut terms = Vec::with_capacity(48);
    let mut lo = boundary;
    for _ in 0..48 {
        let hi = lo + 2.0 * half_arch;
        terms.push(quad::adaptive_simpson(&f, lo, hi, 1e-11, 1e-300));
        lo = hi;
    }
    head + quad::accelerate_alternating(&terms)
}

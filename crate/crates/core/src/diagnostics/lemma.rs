//! The exponential-damping integral bound
//! `int_tau^inf e^{-G(t,tau)} dt <= (2/K) (1+tau)^alpha`
//! with `G(t,tau) = int_tau^t gamma(s) ds`, valid for `tau >= tau0`.

use crate::problem::{DampingKind, DampingSchedule};
use crate::quad;
use crate::{Error, Result};

/// `G(t, tau) = int_tau^t gamma(s) ds`.
///
/// Closed form for the power families; exact piecewise-quadratic integration
/// for tabulated schedules (the interpolant is piecewise linear).
pub fn big_gamma(schedule: &DampingSchedule, tau: f64, t: f64) -> Result<f64> {
    if t < tau {
        return Err(Error::Precondition(format!("big_gamma needs t >= tau, got {t} < {tau}")));
    }
    if tau < 0.0 {
        return Err(Error::Precondition("big_gamma needs tau >= 0".into()));
    }
    let alpha = schedule.alpha();
    Ok(match schedule.kind() {
        DampingKind::Power | DampingKind::ScaledPower { .. } => {
            let k_eff = schedule.effective_k().unwrap();
            k_eff * ((1.0 + t).powf(1.0 - alpha) - (1.0 + tau).powf(1.0 - alpha)) / (1.0 - alpha)
        }
        DampingKind::Tabulated { grid } => {
            // gamma is piecewise linear, so the primitive is exact.
            let segment = |a: f64, b: f64| -> f64 {
                if b <= a {
                    return 0.0;
                }
                0.5 * (schedule.gamma(a) + schedule.gamma(b)) * (b - a)
            };
            let mut total = 0.0;
            let mut lo = tau;
            for &(tk, _) in grid.iter() {
                if tk <= lo {
                    continue;
                }
                if tk >= t {
                    break;
                }
                total += segment(lo, tk);
                lo = tk;
            }
            total + segment(lo, t)
        }
    })
}

/// Smallest threshold from which the bound's derivation applies:
/// `max(t0, (2 alpha / K)^{1/(1-alpha)} - 1)`, clamped at zero.
pub fn tau0(schedule: &DampingSchedule) -> f64 {
    let alpha = schedule.alpha();
    let k = schedule.k();
    let from_proof = if alpha == 0.0 {
        0.0
    } else {
        ((2.0 * alpha / k).powf(1.0 / (1.0 - alpha)) - 1.0).max(0.0)
    };
    schedule.t0().max(from_proof)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Lemma1Report {
    pub tau: f64,
    /// Quadrature of `e^{-G(t,tau)}` plus the analytic tail bound.
    pub lhs: f64,
    /// `(2/K) (1+tau)^alpha`.
    pub rhs: f64,
    pub pass: bool,
}

/// Verify the integral bound at one `tau >= tau0`.
///
/// The horizon starts at `t_quad_hint` and is enlarged until the analytic
/// tail bound `e^{-G(T,tau)} (1+T)^alpha / K` (up to the 1/(1 - ...) factor
/// from integration by parts) drops below 1e-12.
pub fn lemma1_check(schedule: &DampingSchedule, tau: f64, t_quad_hint: f64) -> Result<Lemma1Report> {
    let threshold = tau0(schedule);
    if tau < threshold {
        return Err(Error::Precondition(format!(
            "lemma bound needs tau >= tau0 = {threshold}, got {tau}"
        )));
    }
    let alpha = schedule.alpha();
    let k = schedule.k();

    let tail_bound = |t_cap: f64| -> Result<f64> {
        let g = big_gamma(schedule, tau, t_cap)?;
        let base = (-g).exp() * (1.0 + t_cap).powf(alpha) / k;
        let correction = alpha / (k * (1.0 + t_cap).powf(1.0 - alpha));
        Ok(if correction < 0.5 { base / (1.0 - correction) } else { base * 2.0 })
    };

    let mut t_cap = t_quad_hint.max(tau + 1.0);
    let mut bound = tail_bound(t_cap)?;
    let mut guard = 0;
    while bound > 1e-12 && guard < 200 {
        t_cap = (t_cap + 1.0) * 2.0;
        bound = tail_bound(t_cap)?;
        guard += 1;
    }

    let f = |t: f64| {
        let g = big_gamma(schedule, tau, t).unwrap_or(f64::INFINITY);
        (-g).exp()
    };
    let body = quad::adaptive_simpson(&f, tau, t_cap, 1e-10, 1e-300);
    let lhs = body + bound;
    let rhs = 2.0 / k * (1.0 + tau).powf(alpha);
    Ok(Lemma1Report { tau, lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-9) })
}

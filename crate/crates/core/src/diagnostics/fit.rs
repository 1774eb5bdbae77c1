//! Decay-rate detectors: log-log fits, the scaled-energy trend, and
//! weighted-integral boundedness verdicts.
//!
//! Asymptotic claims are made falsifiable at finite horizon: a rate
//! `quantity = o(t^{-nu})` passes when the scaled series `(1+t)^nu q(t)`
//! shrinks by 5x across the final two time decades, or the log-log slope
//! clears the target with margin.

use crate::{Error, Result};

use super::record::EnergyRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Energy,
    Anchor,
    Speed,
}

impl Quantity {
    pub fn series<'r>(&self, record: &'r EnergyRecord) -> &'r [f64] {
        match self {
            Quantity::Energy => &record.energy,
            Quantity::Anchor => &record.anchor,
            Quantity::Speed => &record.speed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DecayFit {
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
    pub verdict: Verdict,
    /// Set when the window was (almost) all zeros: consistent with any
    /// decay rate, but flagged.
    pub degenerate: bool,
}

/// Least-squares line on `(log t, log q)` over the final `window_fraction`
/// of the record, judged against a target decay rate `nu`.
pub fn decay_fit(
    record: &EnergyRecord,
    quantity: Quantity,
    window_fraction: f64,
    target_nu: f64,
) -> Result<DecayFit> {
    decay_fit_series(&record.t, quantity.series(record), window_fraction, target_nu)
}

/// Same as [`decay_fit`] for a bare `(t, q)` series (used by the CSV tool).
pub fn decay_fit_series(
    t: &[f64],
    q: &[f64],
    window_fraction: f64,
    target_nu: f64,
) -> Result<DecayFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::invalid("window_fraction must lie in (0, 1]"));
    }
    let t_end = *t.last().ok_or_else(|| Error::Precondition("empty record".into()))?;
    let t_lo = t_end * (1.0 - window_fraction);
    let window = (t_lo, t_end);

    let in_window: Vec<(f64, f64)> = t
        .iter()
        .zip(q)
        .filter(|(&ti, _)| ti >= t_lo && ti > 0.0)
        .map(|(&ti, &qi)| (ti, qi))
        .collect();
    let positive: Vec<(f64, f64)> = in_window
        .iter()
        .copied()
        .filter(|&(_, qi)| qi > 0.0)
        .collect();

    // All-zero window: no decay rate can be falsified.
    if positive.len() < in_window.len() / 10 && in_window.len() >= 10 {
        return Ok(DecayFit {
            window,
            slope: f64::NEG_INFINITY,
            intercept: f64::NEG_INFINITY,
            correlation: 0.0,
            verdict: Verdict::Consistent,
            degenerate: true,
        });
    }
    if positive.len() < 10 {
        return Err(Error::Precondition(format!(
            "decay fit needs >= 10 positive samples in the window, found {}",
            positive.len()
        )));
    }

    let xs: Vec<f64> = positive.iter().map(|(ti, _)| ti.ln()).collect();
    let ys: Vec<f64> = positive.iter().map(|(_, qi)| qi.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Precondition("decay fit window spans a single time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // A (numerically) constant series is a perfect zero-slope fit, not a
    // noisy one; rounding in the mean keeps syy from being exactly zero.
    let variance_floor = 1e-18 * n * (1.0 + my * my);
    let (correlation, quality) = if syy > variance_floor {
        let c = sxy / (sxx * syy).sqrt();
        (c, c * c)
    } else {
        (0.0, 1.0)
    };

    // Scaled-series monotonicity rescues slowly-varying factors.
    let scaled_monotone = positive
        .windows(2)
        .all(|w| (1.0 + w[1].0).powf(target_nu) * w[1].1 <= (1.0 + w[0].0).powf(target_nu) * w[0].1 * (1.0 + 1e-9));

    let verdict = if slope <= -target_nu + 0.1 || scaled_monotone {
        Verdict::Consistent
    } else if quality < 0.5 {
        Verdict::Inconclusive
    } else {
        Verdict::Inconsistent
    };

    Ok(DecayFit { window, slope, intercept, correlation, verdict, degenerate: false })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TrendReport {
    pub nu: f64,
    /// `(1+t_k)^nu * E(t_k)`.
    pub scaled: Vec<f64>,
    /// Terminal scaled value over the max of the first decade of the
    /// two-decade window; 0 when the window max vanishes.
    pub ratio: f64,
    pub pass: bool,
    pub degenerate: bool,
}

/// The little-o detector: `(1+t)^nu E(t)` must shrink to <= 0.2 of its
/// first-decade maximum across the final two time decades.
pub fn scaled_energy_trend(record: &EnergyRecord, nu: f64) -> Result<TrendReport> {
    scaled_trend_series(&record.t, &record.energy, nu)
}

/// [`scaled_energy_trend`] for a bare `(t, q)` series.
pub fn scaled_trend_series(t: &[f64], q: &[f64], nu: f64) -> Result<TrendReport> {
    if t.len() < 4 {
        return Err(Error::Precondition("trend needs at least 4 samples".into()));
    }
    let t_end = *t.last().unwrap();
    let scaled: Vec<f64> = t
        .iter()
        .zip(q)
        .map(|(&t, &e)| (1.0 + t).powf(nu) * e)
        .collect();

    let lo = t_end / 100.0;
    let mid = t_end / 10.0;
    let first_decade_max = t
        .iter()
        .zip(&scaled)
        .filter(|(&t, _)| t >= lo && t <= mid)
        .map(|(_, &s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    if !first_decade_max.is_finite() {
        return Err(Error::Precondition(
            "trend needs samples inside [t_end/100, t_end/10]".into(),
        ));
    }
    let last = *scaled.last().unwrap();
    let (ratio, degenerate) = if first_decade_max <= 0.0 {
        (0.0, true)
    } else {
        (last / first_decade_max, false)
    };
    Ok(TrendReport { nu, scaled, ratio, pass: ratio <= 0.2, degenerate })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IntegralVerdict {
    pub nu: f64,
    pub terminal: f64,
    /// Growth over the final decade as a fraction of the total.
    pub last_decade_fraction: f64,
    pub bounded: bool,
}

/// Boundedness of the running integral `I_nu`: the final decade must
/// contribute at most 5% of the total.
pub fn velocity_integral_verdict(record: &EnergyRecord, nu: f64) -> Result<IntegralVerdict> {
    let idx = record
        .nu_list
        .iter()
        .position(|&x| (x - nu).abs() <= 1e-12)
        .ok_or_else(|| {
            Error::invalid(format!("nu = {nu} is not in the record's configured list"))
        })?;
    let series = &record.velocity_integrals[idx];
    bounded_growth(record, series, nu)
}

/// Same 5% rule for the gradient-norm integral
/// `int (1+s)^alpha ||grad Phi||_{V'} ds`.
pub fn grad_integral_verdict(record: &EnergyRecord) -> Result<IntegralVerdict> {
    bounded_growth(record, &record.grad_integral, record.alpha)
}

fn bounded_growth(record: &EnergyRecord, series: &[f64], nu: f64) -> Result<IntegralVerdict> {
    if series.len() != record.len() || record.is_empty() {
        return Err(Error::Precondition("integral series is not sample-aligned".into()));
    }
    let terminal = *series.last().unwrap();
    let split = record.index_at(record.t_end() / 10.0);
    let at_split = if split == 0 { 0.0 } else { series[split.min(series.len() - 1)] };
    let growth = terminal - at_split;
    let fraction = if terminal > 0.0 { growth / terminal } else { 0.0 };
    Ok(IntegralVerdict { nu, terminal, last_decade_fraction: fraction, bounded: fraction <= 0.05 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_record(t: Vec<f64>, energy: Vec<f64>) -> EnergyRecord {
        let n = t.len();
        EnergyRecord {
            alpha: 0.5,
            t,
            energy,
            etilde: vec![0.0; n],
            etilde_is_plain: true,
            anchor: vec![0.0; n],
            speed: vec![0.0; n],
            dist_v: vec![0.0; n],
            gradnorm_vp: vec![0.0; n],
            source_pairing: vec![0.0; n],
            nu_list: vec![],
            velocity_integrals: vec![],
            grad_integral: vec![0.0; n],
            checkpoints: vec![],
            sup_h_norm: 0.0,
        }
    }

    fn log_grid(t_end: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| 0.1 * (t_end / 0.1).powf(i as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn exact_power_law_slope() {
        let t = log_grid(1.0e4, 400);
        let e: Vec<f64> = t.iter().map(|&x| 1.0 / x).collect();
        let rec = synthetic_record(t, e);
        let fit = decay_fit(&rec, Quantity::Energy, 0.9, 1.0).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-6, "slope {}", fit.slope);
        assert_eq!(fit.verdict, Verdict::Consistent);
    }

    #[test]
    fn constant_series_inconsistent() {
        let t = log_grid(1.0e4, 400);
        let e = vec![0.7; 400];
        let rec = synthetic_record(t, e);
        let fit = decay_fit(&rec, Quantity::Energy, 0.9, 0.5).unwrap();
        assert!(fit.slope.abs() < 1e-9);
        assert_eq!(fit.verdict, Verdict::Inconsistent);
    }

    #[test]
    fn zero_window_degenerate() {
        let t = log_grid(1.0e4, 400);
        let e = vec![0.0; 400];
        let rec = synthetic_record(t, e);
        let fit = decay_fit(&rec, Quantity::Energy, 0.5, 1.0).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.verdict, Verdict::Consistent);
    }

    #[test]
    fn trend_exact_boundary_fails() {
        // E = (1+t)^{-nu} exactly: the scaled series is constant, which is
        // precisely not little-o.
        let t = log_grid(1.0e4, 600);
        let nu = 0.8;
        let e: Vec<f64> = t.iter().map(|&x| (1.0 + x).powf(-nu)).collect();
        let rec = synthetic_record(t, e);
        let trend = scaled_energy_trend(&rec, nu).unwrap();
        assert!(!trend.pass, "ratio {}", trend.ratio);
        assert!((trend.ratio - 1.0).abs() < 0.05);
    }

    #[test]
    fn trend_faster_decay_passes() {
        let t = log_grid(1.0e4, 600);
        let e: Vec<f64> = t.iter().map(|&x| (1.0 + x).powf(-2.0)).collect();
        let rec = synthetic_record(t, e);
        let trend = scaled_energy_trend(&rec, 1.0).unwrap();
        assert!(trend.pass, "ratio {}", trend.ratio);
    }

    #[test]
    fn trend_zero_energy_degenerate_pass() {
        let t = log_grid(1.0e4, 600);
        let rec = synthetic_record(t, vec![0.0; 600]);
        let trend = scaled_energy_trend(&rec, 1.0).unwrap();
        assert!(trend.pass && trend.degenerate);
        assert_eq!(trend.ratio, 0.0);
    }

    #[test]
    fn velocity_verdict_requires_configured_nu() {
        let t = log_grid(100.0, 50);
        let rec = synthetic_record(t, vec![0.0; 50]);
        assert!(velocity_integral_verdict(&rec, 1.0).is_err());
    }

    #[test]
    fn integrated_trajectory_fit_consistent() {
        // Quadratic with zero source: the energy decays faster than any
        // power, so the fit must be consistent with nu = 2 alpha = 1.
        use crate::diagnostics::record::{simulate, DiagnosticsConfig};
        use crate::dynamics::{IntegratorConfig, TrajectoryState};
        use crate::problem::{ConvexProblem, DampingSchedule, SourceTerm};

        let p = ConvexProblem::quadratic(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let sched = DampingSchedule::power(2.0, 0.5, 0.0).unwrap();
        let cfg = IntegratorConfig::new(5e-3, 1.0e4, 200, 0.5).unwrap();
        let initial =
            TrajectoryState::new(0.0, vec![1.0, -0.5, 0.3, 0.8], vec![0.0; 4]).unwrap();
        let rec = simulate(
            &cfg,
            &p,
            &sched,
            &SourceTerm::zero(4),
            &initial,
            &DiagnosticsConfig::default(),
        )
        .unwrap();
        let fit = decay_fit(&rec, Quantity::Energy, 0.5, 1.0).unwrap();
        assert_eq!(fit.verdict, Verdict::Consistent, "{fit:?}");
    }

    #[test]
    fn velocity_verdict_on_trajectories() {
        use crate::diagnostics::record::{simulate, DiagnosticsConfig};
        use crate::dynamics::{IntegratorConfig, TrajectoryState};
        use crate::problem::{ConvexProblem, DampingSchedule, SourceTerm};

        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        let diag = DiagnosticsConfig { nu_list: vec![0.0], ..Default::default() };
        let cfg = IntegratorConfig::new(1e-2, 500.0, 10, 1.0).unwrap();

        // Equilibrium: the integral stays at zero, trivially bounded.
        let damped = DampingSchedule::power(1.0, 0.0, 0.0).unwrap();
        let rec = simulate(
            &cfg,
            &p,
            &damped,
            &SourceTerm::zero(1),
            &TrajectoryState::at_equilibrium(&p),
            &diag,
        )
        .unwrap();
        let v = velocity_integral_verdict(&rec, 0.0).unwrap();
        assert!(v.bounded && v.terminal == 0.0);

        // Undamped oscillator: |u'|^2 has nonzero mean, the integral grows
        // linearly and the verdict must flag it.
        let undamped = DampingSchedule::tabulated(1.0, 0.0, 0.0, vec![(0.0, 0.0)]).unwrap();
        let rec = simulate(
            &cfg,
            &p,
            &undamped,
            &SourceTerm::zero(1),
            &TrajectoryState::new(0.0, vec![1.0], vec![0.0]).unwrap(),
            &diag,
        )
        .unwrap();
        let v = velocity_integral_verdict(&rec, 0.0).unwrap();
        assert!(!v.bounded, "{v:?}");
    }

    #[test]
    fn bounded_growth_flags_linear_series() {
        let t: Vec<f64> = (0..=1000).map(|i| i as f64).collect();
        let mut rec = synthetic_record(t.clone(), vec![0.0; 1001]);
        rec.nu_list = vec![0.5];
        // Linear growth: final decade carries ~90% of the total.
        rec.velocity_integrals = vec![t.clone()];
        let v = velocity_integral_verdict(&rec, 0.5).unwrap();
        assert!(!v.bounded);
        // Saturating series: bounded.
        rec.velocity_integrals = vec![t.iter().map(|&x| 1.0 - (-x / 5.0).exp()).collect()];
        let v = velocity_integral_verdict(&rec, 0.5).unwrap();
        assert!(v.bounded);
    }
}

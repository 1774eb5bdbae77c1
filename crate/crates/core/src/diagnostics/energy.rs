//! Pointwise energy quantities and the energy-identity residual.

use crate::dynamics::TrajectoryState;
use crate::problem::{ConvexProblem, DampingSchedule, SourceTerm};
use crate::{Error, Result};

use super::record::EnergyRecord;
use super::tail::TailModel;

/// `E = |u'|_H^2 / 2 + Phi(u) - Phi*`.
pub fn energy(problem: &ConvexProblem, state: &TrajectoryState) -> Result<f64> {
    Ok(0.5 * problem.h_inner(&state.v, &state.v) + problem.phi(&state.u)? - problem.phi_star())
}

/// `E + int_t^inf |g(s)|^2 / (4 gamma(s)) ds`; nonincreasing along solutions
/// whenever the tail converges. Errors when the tail diverges, directing the
/// caller to the plain energy.
pub fn modified_energy(
    problem: &ConvexProblem,
    schedule: &DampingSchedule,
    source: &SourceTerm,
    state: &TrajectoryState,
) -> Result<f64> {
    let tail = TailModel::build(schedule, source);
    Ok(energy(problem, state)? + tail.evaluate(schedule, source, state.t)?)
}

/// Anchor function `p = |u - u*|_H^2 / 2`.
pub fn anchor(problem: &ConvexProblem, state: &TrajectoryState) -> Result<f64> {
    if state.dim() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), found: state.dim() });
    }
    let diff: Vec<f64> = state
        .u
        .iter()
        .zip(problem.minimizer())
        .map(|(a, b)| a - b)
        .collect();
    Ok(0.5 * problem.h_inner(&diff, &diff))
}

/// Residual of the energy identity `E'(t) = -gamma |u'|^2 + <g, u'>` checked
/// against a centered difference of the sampled series.
///
/// Needs uniform sampling. Returns the max absolute residual over interior
/// samples; second-order small in the sampling interval.
pub fn energy_derivative_residual(
    record: &EnergyRecord,
    schedule: &DampingSchedule,
) -> Result<f64> {
    if record.len() < 3 {
        return Err(Error::Precondition(
            "energy residual needs at least 3 samples".into(),
        ));
    }
    let dt = record.uniform_dt().ok_or_else(|| {
        Error::Precondition("energy residual needs uniform sampling".into())
    })?;

    let mut max_residual = 0.0_f64;
    for k in 1..record.len() - 1 {
        let t = record.t[k];
        let centered = (record.energy[k + 1] - record.energy[k - 1]) / (2.0 * dt);
        let gamma = schedule.gamma(t);
        let speed2 = record.speed[k] * record.speed[k];
        let predicted = -gamma * speed2 + record.source_pairing[k];
        let residual = (centered - predicted).abs();
        if residual > max_residual {
            max_residual = residual;
        }
    }
    Ok(max_residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::record::{simulate, DiagnosticsConfig};
    use crate::dynamics::IntegratorConfig;
    use crate::problem::SourceFamily;

    #[test]
    fn energy_examples() {
        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        let at = |u: f64, v: f64| TrajectoryState::new(0.0, vec![u], vec![v]).unwrap();
        assert_eq!(energy(&p, &TrajectoryState::at_equilibrium(&p)).unwrap(), 0.0);
        assert!((energy(&p, &at(0.0, 2.0)).unwrap() - 2.0).abs() < 1e-15);
        assert!((energy(&p, &at(1.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn anchor_examples() {
        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        let s = TrajectoryState::new(0.0, vec![3.0], vec![0.0]).unwrap();
        assert!((anchor(&p, &s).unwrap() - 4.5).abs() < 1e-15);

        let w = ConvexProblem::wave(64, None).unwrap();
        let mut rng = crate::rng::SplitMix64::new(4);
        let u = rng.unit_vector(64, w.mass_weight());
        let s = TrajectoryState::new(0.0, u, vec![0.0; 64]).unwrap();
        assert!((anchor(&w, &s).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn modified_energy_zero_source_equals_energy() {
        let p = ConvexProblem::quadratic(vec![1.0, 2.0]).unwrap();
        let sched = DampingSchedule::power(1.0, 0.5, 0.0).unwrap();
        let src = SourceTerm::zero(2);
        let s = TrajectoryState::new(0.0, vec![1.0, -1.0], vec![0.5, 0.0]).unwrap();
        let e = energy(&p, &s).unwrap();
        let et = modified_energy(&p, &sched, &src, &s).unwrap();
        assert_eq!(e, et);
    }

    #[test]
    fn modified_energy_power_tail_example() {
        // tail(t) = 1/(4(1+t)) for c=1, beta=1, gamma = 1 (alpha = 0).
        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        let sched = DampingSchedule::power(1.0, 0.0, 0.0).unwrap();
        let src = SourceTerm::new(SourceFamily::PowerDecay { c: 1.0, beta: 1.0 }, vec![1.0], 1.0)
            .unwrap();
        let s = TrajectoryState::new(3.0, vec![0.0], vec![0.0]).unwrap();
        let et = modified_energy(&p, &sched, &src, &s).unwrap();
        assert!((et - 1.0 / 16.0).abs() < 1e-14);
    }

    fn residual_for(dt_sample: f64) -> f64 {
        // Scalar damped oscillator with gamma = 1, g = 0.
        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        let sched = DampingSchedule::power(1.0, 0.0, 0.0).unwrap();
        let src = SourceTerm::zero(1);
        let cfg = IntegratorConfig::new(dt_sample, 5.0, 1, 1.0).unwrap();
        let initial = TrajectoryState::new(0.0, vec![1.0], vec![0.0]).unwrap();
        let record =
            simulate(&cfg, &p, &sched, &src, &initial, &DiagnosticsConfig::default()).unwrap();
        energy_derivative_residual(&record, &sched).unwrap()
    }

    #[test]
    fn residual_scales_quadratically() {
        let r2 = residual_for(1e-2);
        let r3 = residual_for(1e-3);
        assert!(r2 <= 1e-3, "residual at 1e-2: {r2}");
        assert!(r3 <= 1e-5, "residual at 1e-3: {r3}");

        let r3_half = residual_for(5e-4);
        let ratio = r3 / r3_half;
        assert!((3.5..=4.5).contains(&ratio), "halving ratio {ratio}");
    }

    #[test]
    fn residual_zero_at_equilibrium() {
        let p = ConvexProblem::quadratic(vec![1.0, 4.0]).unwrap();
        let sched = DampingSchedule::power(1.0, 0.5, 0.0).unwrap();
        let src = SourceTerm::zero(2);
        let cfg = IntegratorConfig::new(1e-2, 2.0, 1, 1.0).unwrap();
        let record = simulate(
            &cfg,
            &p,
            &sched,
            &src,
            &TrajectoryState::at_equilibrium(&p),
            &DiagnosticsConfig::default(),
        )
        .unwrap();
        let r = energy_derivative_residual(&record, &sched).unwrap();
        assert!(r <= 1e-14, "residual {r}");
    }

    #[test]
    fn residual_too_few_samples() {
        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        let sched = DampingSchedule::power(1.0, 0.0, 0.0).unwrap();
        let src = SourceTerm::zero(1);
        let cfg = IntegratorConfig::new(0.5, 0.5, 1, 1.0).unwrap();
        let record = simulate(
            &cfg,
            &p,
            &sched,
            &src,
            &TrajectoryState::new(0.0, vec![1.0], vec![0.0]).unwrap(),
            &DiagnosticsConfig::default(),
        )
        .unwrap();
        assert!(energy_derivative_residual(&record, &sched).is_err());
    }
}

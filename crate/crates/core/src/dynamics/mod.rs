//! Fixed-step integration of the second-order equation as a first-order
//! system in `(u, u')`.
//!
//! The scheme is classical RK4 with time-dependent coefficients evaluated at
//! the stage times, which preserves the fourth-order local accuracy for the
//! nonautonomous right-hand side
//!
//! ```text
//! du/dt = v,    dv/dt = g(t) - gamma(t) v - A u - f(u).
//! ```
//!
//! Fixed steps (rather than adaptive control) keep the sampled series
//! uniform for the finite-difference and quadrature diagnostics, and make
//! reruns bit-identical.

use crate::linalg;
use crate::problem::{ConvexProblem, DampingSchedule, SourceTerm};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Real-axis stability limit of classical RK4 (|R(z)| = 1 near z = -2.785).
pub const RK4_STABILITY_LIMIT: f64 = 2.8;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl TrajectoryState {
    pub fn new(t: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::invalid(format!("state time must be nonnegative, got {t}")));
        }
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
        }
        let state = TrajectoryState { t, u, v };
        if !state.is_finite() {
            return Err(Error::invalid("state contains non-finite components"));
        }
        Ok(state)
    }

    /// Rest state at the problem's minimizer.
    pub fn at_equilibrium(problem: &ConvexProblem) -> Self {
        TrajectoryState {
            t: 0.0,
            u: problem.minimizer().to_vec(),
            v: vec![0.0; problem.dim()],
        }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record every k-th step.
    pub sample_stride: usize,
    /// Fraction of the RK4 stability limit the step may use, in `(0, 1]`.
    pub stability_margin: f64,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64, sample_stride: usize, stability_margin: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if t_end < 0.0 || !t_end.is_finite() {
            return Err(Error::invalid(format!("t_end must be nonnegative, got {t_end}")));
        }
        if sample_stride == 0 {
            return Err(Error::invalid("sample_stride must be at least 1"));
        }
        if !(stability_margin > 0.0 && stability_margin <= 1.0) {
            return Err(Error::invalid(format!(
                "stability_margin must lie in (0, 1], got {stability_margin}"
            )));
        }
        Ok(IntegratorConfig { dt, t_end, sample_stride, stability_margin })
    }

    /// The step-refined oracle configuration: `dt/10`, sampling aligned with
    /// the coarse grid.
    pub fn refined(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.dt / 10.0,
            t_end: self.t_end,
            sample_stride: self.sample_stride * 10,
            stability_margin: self.stability_margin,
        }
    }

    /// Number of full steps from `t_start`, plus whether a shortened final
    /// step is needed to land exactly on `t_end`.
    pub fn steps_from(&self, t_start: f64) -> (usize, bool) {
        if self.t_end <= t_start {
            return (0, false);
        }
        let raw = (self.t_end - t_start) / self.dt;
        let rounded = raw.round();
        if (raw - rounded).abs() <= 1e-9 * rounded.max(1.0) {
            (rounded as usize, false)
        } else {
            (raw.floor() as usize, true)
        }
    }
}

/// Receives each sampled state; the step index counts integrator steps.
pub trait Observer {
    fn observe(&mut self, step: usize, state: &TrajectoryState) -> Result<()>;
}

impl Observer for Vec<TrajectoryState> {
    fn observe(&mut self, _step: usize, state: &TrajectoryState) -> Result<()> {
        self.push(state.clone());
        Ok(())
    }
}

/// Right-hand side of the first-order system.
pub fn rhs(
    problem: &ConvexProblem,
    schedule: &DampingSchedule,
    source: &SourceTerm,
    state: &TrajectoryState,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = problem.dim();
    if state.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: state.dim() });
    }
    let mut dv = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    rhs_accel(problem, schedule, source, state.t, &state.u, &state.v, &mut dv, &mut tmp);
    Ok((state.v.clone(), dv))
}

/// `dv = g(t) - gamma(t) v - grad Phi(u)`, written into `dv`.
#[allow(clippy::too_many_arguments)]
fn rhs_accel(
    problem: &ConvexProblem,
    schedule: &DampingSchedule,
    source: &SourceTerm,
    t: f64,
    u: &[f64],
    v: &[f64],
    dv: &mut [f64],
    tmp: &mut [f64],
) {
    problem.grad_phi_into(u, dv, tmp);
    let gamma = schedule.gamma(t);
    source.eval_into(t, tmp);
    for i in 0..u.len() {
        dv[i] = tmp[i] - gamma * v[i] - dv[i];
    }
}

struct RkScratch {
    k_u: [Vec<f64>; 4],
    k_v: [Vec<f64>; 4],
    stage_u: Vec<f64>,
    stage_v: Vec<f64>,
    tmp: Vec<f64>,
}

impl RkScratch {
    fn new(n: usize) -> Self {
        RkScratch {
            k_u: std::array::from_fn(|_| vec![0.0; n]),
            k_v: std::array::from_fn(|_| vec![0.0; n]),
            stage_u: vec![0.0; n],
            stage_v: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

fn rk4_step(
    problem: &ConvexProblem,
    schedule: &DampingSchedule,
    source: &SourceTerm,
    state: &mut TrajectoryState,
    t_next: f64,
    scratch: &mut RkScratch,
) {
    let n = state.u.len();
    let t = state.t;
    let dt = t_next - t;
    let half = 0.5 * dt;

    // Stage 1 at t.
    scratch.k_u[0].copy_from_slice(&state.v);
    {
        let (k_v, tmp) = (&mut scratch.k_v[0], &mut scratch.tmp);
        rhs_accel(problem, schedule, source, t, &state.u, &state.v, k_v, tmp);
    }

    // Stage 2 at t + dt/2.
    for i in 0..n {
        scratch.stage_u[i] = state.u[i] + half * scratch.k_u[0][i];
        scratch.stage_v[i] = state.v[i] + half * scratch.k_v[0][i];
    }
    scratch.k_u[1].copy_from_slice(&scratch.stage_v);
    {
        let (k_v, tmp) = (&mut scratch.k_v[1], &mut scratch.tmp);
        rhs_accel(problem, schedule, source, t + half, &scratch.stage_u, &scratch.stage_v, k_v, tmp);
    }

    // Stage 3 at t + dt/2.
    for i in 0..n {
        scratch.stage_u[i] = state.u[i] + half * scratch.k_u[1][i];
        scratch.stage_v[i] = state.v[i] + half * scratch.k_v[1][i];
    }
    scratch.k_u[2].copy_from_slice(&scratch.stage_v);
    {
        let (k_v, tmp) = (&mut scratch.k_v[2], &mut scratch.tmp);
        rhs_accel(problem, schedule, source, t + half, &scratch.stage_u, &scratch.stage_v, k_v, tmp);
    }

    // Stage 4 at t + dt.
    for i in 0..n {
        scratch.stage_u[i] = state.u[i] + dt * scratch.k_u[2][i];
        scratch.stage_v[i] = state.v[i] + dt * scratch.k_v[2][i];
    }
    scratch.k_u[3].copy_from_slice(&scratch.stage_v);
    {
        let (k_v, tmp) = (&mut scratch.k_v[3], &mut scratch.tmp);
        rhs_accel(problem, schedule, source, t_next, &scratch.stage_u, &scratch.stage_v, k_v, tmp);
    }

    let w = dt / 6.0;
    for i in 0..n {
        state.u[i] += w
            * (scratch.k_u[0][i]
                + 2.0 * scratch.k_u[1][i]
                + 2.0 * scratch.k_u[2][i]
                + scratch.k_u[3][i]);
        state.v[i] += w
            * (scratch.k_v[0][i]
                + 2.0 * scratch.k_v[1][i]
                + 2.0 * scratch.k_v[2][i]
                + scratch.k_v[3][i]);
    }
    state.t = t_next;
}

/// Advance one step of size `dt`; errors if the result is non-finite.
pub fn step(
    problem: &ConvexProblem,
    schedule: &DampingSchedule,
    source: &SourceTerm,
    state: &TrajectoryState,
    dt: f64,
) -> Result<TrajectoryState> {
    if !(dt > 0.0) {
        return Err(Error::invalid("step size must be positive"));
    }
    let mut next = state.clone();
    let mut scratch = RkScratch::new(state.dim());
    rk4_step(problem, schedule, source, &mut next, state.t + dt, &mut scratch);
    if !next.is_finite() {
        return Err(Error::Instability { t: state.t, step: 0, partial: None });
    }
    Ok(next)
}

/// Upper estimate of `lambda_max(A)`.
///
/// Structured operators report an exact bound (the wave family uses
/// `4/h^2`); dense operators run 200 power iterations to relative tolerance
/// 1e-6 and inflate the Rayleigh quotient by 10%.
pub fn spectral_bound(problem: &ConvexProblem) -> f64 {
    let op = problem.operator();
    if let Some(exact) = op.lambda_max_exact() {
        return exact;
    }
    let n = op.dim();
    let mut rng = SplitMix64::new(0x9414_c0de);
    let mut v = rng.unit_vector(n, 1.0);
    let mut lambda = 0.0_f64;
    let mut av = vec![0.0; n];
    for _ in 0..200 {
        op.apply_into(&v, &mut av);
        let norm = linalg::dot(&av, &av).sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        let rayleigh = linalg::dot(&av, &v) / linalg::dot(&v, &v);
        for i in 0..n {
            v[i] = av[i] / norm;
        }
        if (rayleigh - lambda).abs() <= 1e-6 * rayleigh.abs().max(1e-12) {
            lambda = rayleigh;
            break;
        }
        lambda = rayleigh;
    }
    1.1 * lambda.max(0.0)
}

/// Max-norm trust region the trajectory is assumed to stay inside, used for
/// the Lipschitz part of the stability guard.
fn trust_radius(initial: &TrajectoryState) -> f64 {
    2.0 * (1.0 + linalg::max_abs(&initial.u)) + linalg::max_abs(&initial.v)
}

/// `sqrt(lambda_max(A) + Lip f)`-based step bound:
/// `dt * sqrt(bound) <= 2.8 * margin`.
pub fn max_stable_dt(problem: &ConvexProblem, initial: &TrajectoryState, margin: f64) -> f64 {
    let bound = spectral_bound(problem) + problem.nonlinearity().lipschitz(trust_radius(initial));
    if bound <= 0.0 {
        f64::INFINITY
    } else {
        RK4_STABILITY_LIMIT * margin / bound.sqrt()
    }
}

pub fn check_stability(
    config: &IntegratorConfig,
    problem: &ConvexProblem,
    initial: &TrajectoryState,
) -> Result<()> {
    let limit = max_stable_dt(problem, initial, config.stability_margin);
    if config.dt > limit * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "dt = {} exceeds the stability guard {:.6e} (margin {})",
            config.dt, limit, config.stability_margin
        )));
    }
    Ok(())
}

/// Run the integrator, invoking the observer at the initial state, at every
/// `sample_stride`-th step, and at the final step.
///
/// Deterministic: identical inputs produce bit-identical trajectories.
pub fn integrate<O: Observer>(
    config: &IntegratorConfig,
    problem: &ConvexProblem,
    schedule: &DampingSchedule,
    source: &SourceTerm,
    initial: &TrajectoryState,
    observer: &mut O,
) -> Result<()> {
    let n = problem.dim();
    if initial.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: initial.dim() });
    }
    if source.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: source.dim() });
    }
    if !initial.is_finite() {
        return Err(Error::invalid("initial state contains non-finite components"));
    }
    check_stability(config, problem, initial)?;

    let (n_full, partial) = config.steps_from(initial.t);
    let mut state = initial.clone();
    let mut scratch = RkScratch::new(n);
    observer.observe(0, &state)?;
    let t_start = initial.t;
    for k in 1..=n_full {
        // Times are recomputed from the step index so sampling stays exact.
        let t_next = t_start + k as f64 * config.dt;
        rk4_step(problem, schedule, source, &mut state, t_next, &mut scratch);
        if !state.is_finite() {
            return Err(Error::Instability { t: state.t, step: k, partial: None });
        }
        if k % config.sample_stride == 0 || (k == n_full && !partial) {
            observer.observe(k, &state)?;
        }
    }
    if partial {
        // Shortened final step so the record ends exactly at t_end.
        rk4_step(problem, schedule, source, &mut state, config.t_end, &mut scratch);
        if !state.is_finite() {
            return Err(Error::Instability { t: state.t, step: n_full + 1, partial: None });
        }
        observer.observe(n_full + 1, &state)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Operator, ScalarNonlinearity, SourceFamily};

    fn no_source(n: usize) -> SourceTerm {
        SourceTerm::zero(n)
    }

    fn constant_damping(k: f64) -> DampingSchedule {
        DampingSchedule::power(k, 0.0, 0.0).unwrap()
    }

    #[test]
    fn rhs_equilibrium_is_zero() {
        let p = ConvexProblem::quadratic(vec![1.0, 2.0]).unwrap();
        let s = TrajectoryState::at_equilibrium(&p);
        let (du, dv) = rhs(&p, &constant_damping(1.0), &no_source(2), &s).unwrap();
        assert_eq!(du, vec![0.0, 0.0]);
        assert_eq!(dv, vec![0.0, 0.0]);
    }

    #[test]
    fn rhs_scalar_example() {
        // n=1, A=[1], gamma(0)=1, u=1, v=1: du=1, dv=-2.
        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        let s = TrajectoryState::new(0.0, vec![1.0], vec![1.0]).unwrap();
        let (du, dv) = rhs(&p, &constant_damping(1.0), &no_source(1), &s).unwrap();
        assert_eq!(du, vec![1.0]);
        assert_eq!(dv, vec![-2.0]);
    }

    #[test]
    fn rhs_pure_forcing() {
        let p = ConvexProblem::flat_basin(1, 2.0).unwrap();
        // |u| < 2 keeps f = 0 and A = 0.
        let s = TrajectoryState::new(0.0, vec![0.0], vec![0.0]).unwrap();
        let src = SourceTerm::new(
            SourceFamily::ExpDecay { c: 1.5, rate: 1.0 },
            vec![1.0],
            1.0,
        )
        .unwrap();
        // Damping contributes nothing at v = 0.
        let (_, dv) = rhs(&p, &constant_damping(1.0), &src, &s).unwrap();
        assert!((dv[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn step_keeps_equilibrium() {
        let p = ConvexProblem::even_quartic(vec![1.0, 3.0]).unwrap();
        let s = TrajectoryState::at_equilibrium(&p);
        let next = step(&p, &constant_damping(1.0), &no_source(2), &s, 0.01).unwrap();
        assert_eq!(next.u, s.u);
        assert_eq!(next.v, s.v);
        assert!((next.t - 0.01).abs() < 1e-16);
    }

    #[test]
    fn undamped_oscillator_period() {
        // u'' + u = 0, u(0)=1, v(0)=0: u(2pi) = 1.
        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        let sched = DampingSchedule::tabulated(1.0, 0.0, 0.0, vec![(0.0, 0.0)]).unwrap();
        let cfg = IntegratorConfig::new(1e-3, 2.0 * std::f64::consts::PI, 1000, 1.0).unwrap();
        let initial = TrajectoryState::new(0.0, vec![1.0], vec![0.0]).unwrap();
        let mut samples: Vec<TrajectoryState> = Vec::new();
        integrate(&cfg, &p, &sched, &no_source(1), &initial, &mut samples).unwrap();
        let last = samples.last().unwrap();
        assert!((last.u[0] - 1.0).abs() < 1e-9, "u(2pi) = {}", last.u[0]);
        assert!(last.v[0].abs() < 1e-9);
    }

    #[test]
    fn critically_damped_closed_form() {
        // u'' + 2u' + u = 0 with u(0)=1, v(0)=-1: u(t) = e^{-t}.
        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        let cfg = IntegratorConfig::new(1e-3, 1.0, 100, 1.0).unwrap();
        let initial = TrajectoryState::new(0.0, vec![1.0], vec![-1.0]).unwrap();
        let mut samples: Vec<TrajectoryState> = Vec::new();
        integrate(&cfg, &p, &constant_damping(2.0), &no_source(1), &initial, &mut samples)
            .unwrap();
        let last = samples.last().unwrap();
        assert!((last.u[0] - (-1.0_f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn t_end_zero_yields_only_initial_sample() {
        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        let cfg = IntegratorConfig::new(0.1, 0.0, 1, 0.5).unwrap();
        let initial = TrajectoryState::new(0.0, vec![1.0], vec![0.0]).unwrap();
        let mut samples: Vec<TrajectoryState> = Vec::new();
        integrate(&cfg, &p, &constant_damping(1.0), &no_source(1), &initial, &mut samples)
            .unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0], initial);
    }

    #[test]
    fn stability_guard_rejects_large_steps() {
        let p = ConvexProblem::wave(16, None).unwrap();
        let initial = TrajectoryState::at_equilibrium(&p);
        // lambda_max = 4 (n+1)^2 = 1156; the guard caps dt near 0.041.
        let bad = IntegratorConfig::new(0.1, 1.0, 1, 0.5).unwrap();
        assert!(check_stability(&bad, &p, &initial).is_err());
        let good = IntegratorConfig::new(0.02, 1.0, 1, 0.5).unwrap();
        assert!(check_stability(&good, &p, &initial).is_ok());
    }

    #[test]
    fn spectral_bound_paths() {
        let wave = ConvexProblem::wave(3, None).unwrap();
        assert!((spectral_bound(&wave) - 64.0).abs() < 1e-12);

        let dense_identity = ConvexProblem::new(
            Operator::dense(4, {
                let mut m = vec![0.0; 16];
                for i in 0..4 {
                    m[i * 4 + i] = 1.0;
                }
                m
            })
            .unwrap(),
            crate::problem::Nonlinearity::Zero,
            1.0,
            crate::problem::MinimizerMode::Known(vec![0.0; 4]),
        )
        .unwrap();
        let b = spectral_bound(&dense_identity);
        assert!((b - 1.1).abs() < 1e-6, "inflated bound {b}");
    }

    #[test]
    fn spectral_bound_dominates_dense_eigensolve() {
        let mut rng = SplitMix64::new(31);
        // Random SPD 8x8 as B^T B.
        let n = 8;
        let b: Vec<f64> = (0..n * n).map(|_| rng.next_symmetric()).collect();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += b[k * n + i] * b[k * n + j];
                }
                m[i * n + j] = acc;
            }
        }
        let op = Operator::dense(n, m.clone()).unwrap();
        let p = ConvexProblem::new(
            op,
            crate::problem::Nonlinearity::Zero,
            1.0,
            crate::problem::MinimizerMode::Known(vec![0.0; n]),
        )
        .unwrap();
        let bound = spectral_bound(&p);
        let exact = nalgebra::SymmetricEigen::new(nalgebra::DMatrix::from_row_slice(n, n, &m))
            .eigenvalues
            .iter()
            .fold(0.0_f64, |a, &x| a.max(x));
        assert!(bound >= exact, "bound {bound} < exact {exact}");
    }

    #[test]
    fn self_convergence_order_three_families() {
        struct Case {
            problem: ConvexProblem,
            schedule: DampingSchedule,
            u0: Vec<f64>,
            v0: Vec<f64>,
            dt: f64,
            t_end: f64,
        }
        let cases = vec![
            Case {
                problem: ConvexProblem::quadratic(vec![1.0]).unwrap(),
                schedule: constant_damping(1.0),
                u0: vec![1.0],
                v0: vec![0.0],
                dt: 0.05,
                t_end: 5.0,
            },
            Case {
                problem: ConvexProblem::quadratic(vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
                schedule: DampingSchedule::power(1.0, 0.5, 0.0).unwrap(),
                u0: vec![1.0, -0.5, 0.25, 0.7],
                v0: vec![0.0, 0.1, 0.0, -0.2],
                dt: 0.05,
                t_end: 5.0,
            },
            Case {
                problem: ConvexProblem::wave(16, Some(ScalarNonlinearity::Cubic)).unwrap(),
                schedule: DampingSchedule::power(1.0, 0.5, 0.0).unwrap(),
                u0: (1..=16)
                    .map(|i| (std::f64::consts::PI * i as f64 / 17.0).sin())
                    .collect(),
                v0: vec![0.0; 16],
                dt: 8e-3,
                t_end: 1.0,
            },
        ];
        for case in cases {
            let initial = TrajectoryState::new(0.0, case.u0.clone(), case.v0.clone()).unwrap();
            let final_u = |dt: f64, refine: bool| -> Vec<f64> {
                let base = IntegratorConfig::new(dt, case.t_end, 1_000_000, 1.0).unwrap();
                let cfg = if refine { base.refined() } else { base };
                let mut samples: Vec<TrajectoryState> = Vec::new();
                integrate(&cfg, &case.problem, &case.schedule, &no_source(initial.dim()), &initial, &mut samples)
                    .unwrap();
                samples.last().unwrap().u.clone()
            };
            let reference = final_u(case.dt, true);
            let err_coarse = linalg::max_abs(&linalg::sub(&final_u(case.dt, false), &reference));
            let reference_half = final_u(case.dt / 2.0, true);
            let err_half =
                linalg::max_abs(&linalg::sub(&final_u(case.dt / 2.0, false), &reference_half));
            let order = (err_coarse / err_half).log2();
            assert!(
                (3.7..=4.3).contains(&order),
                "observed order {order} (errors {err_coarse:.3e} / {err_half:.3e})"
            );
        }
    }

    #[test]
    fn equilibrium_preserved_long_horizon() {
        for p in [
            ConvexProblem::quadratic(vec![1.0, 2.0]).unwrap(),
            ConvexProblem::shifted_quartic(vec![1.0], 2.0).unwrap(),
            ConvexProblem::wave(8, Some(ScalarNonlinearity::Cubic)).unwrap(),
        ] {
            let n = p.dim();
            let initial = TrajectoryState::at_equilibrium(&p);
            let sched = DampingSchedule::power(1.0, 0.5, 0.0).unwrap();
            let dt = (max_stable_dt(&p, &initial, 0.5) * 0.9).min(0.05);
            let steps = (100.0 / dt).ceil() as usize;
            let cfg = IntegratorConfig::new(100.0 / steps as f64, 100.0, steps, 0.5).unwrap();
            let mut samples: Vec<TrajectoryState> = Vec::new();
            integrate(&cfg, &p, &sched, &no_source(n), &initial, &mut samples).unwrap();
            let last = samples.last().unwrap();
            let drift = p.h_norm(&linalg::sub(&last.u, p.minimizer()));
            assert!(drift <= 1e-9, "equilibrium drift {drift}");
        }
    }

    #[test]
    fn conservative_energy_band_without_damping() {
        // gamma = 0, g = 0, quadratic: RK4 keeps E within a 1e-8 band of
        // E(0) over t <= 100 at this step size.
        let p = ConvexProblem::quadratic(vec![1.0, 2.0]).unwrap();
        let sched = DampingSchedule::tabulated(1.0, 0.0, 0.0, vec![(0.0, 0.0)]).unwrap();
        let cfg = IntegratorConfig::new(1e-3, 100.0, 100, 1.0).unwrap();
        let initial = TrajectoryState::new(0.0, vec![1.0, 0.3], vec![0.0, -0.4]).unwrap();
        let e0 = 0.5 * p.h_inner(&initial.v, &initial.v) + p.phi(&initial.u).unwrap();
        struct Band<'a> {
            p: &'a ConvexProblem,
            min: f64,
            max: f64,
        }
        impl Observer for Band<'_> {
            fn observe(&mut self, _k: usize, s: &TrajectoryState) -> Result<()> {
                let e = 0.5 * self.p.h_inner(&s.v, &s.v) + self.p.phi(&s.u).unwrap();
                self.min = self.min.min(e);
                self.max = self.max.max(e);
                Ok(())
            }
        }
        let mut band = Band { p: &p, min: f64::INFINITY, max: f64::NEG_INFINITY };
        integrate(&cfg, &p, &sched, &no_source(2), &initial, &mut band).unwrap();
        assert!(band.min >= e0 * (1.0 - 1e-8), "band {} .. {}", band.min, band.max);
        assert!(band.max <= e0 * (1.0 + 1e-8));
    }

    #[test]
    fn reference_solve_agrees_at_tiny_dt() {
        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        let sched = constant_damping(1.0);
        let cfg = IntegratorConfig::new(1e-3, 1.0, 1000, 1.0).unwrap();
        let initial = TrajectoryState::new(0.0, vec![1.0], vec![0.0]).unwrap();
        let run = |c: &IntegratorConfig| {
            let mut s: Vec<TrajectoryState> = Vec::new();
            integrate(c, &p, &sched, &no_source(1), &initial, &mut s).unwrap();
            s.last().unwrap().u[0]
        };
        let coarse = run(&cfg);
        let fine = run(&cfg.refined());
        assert!((coarse - fine).abs() <= 1e-12);
    }

    #[test]
    fn wave_order_of_convergence_vs_reference() {
        // Coarse at 10 dt vs the dt/10 oracle: deviation ratio ~ 10^4.
        let p = ConvexProblem::wave(16, None).unwrap();
        let sched = DampingSchedule::power(1.0, 0.5, 0.0).unwrap();
        let u0: Vec<f64> = (1..=16)
            .map(|i| (std::f64::consts::PI * i as f64 / 17.0).sin())
            .collect();
        let initial = TrajectoryState::new(0.0, u0, vec![0.0; 16]).unwrap();
        let run = |dt: f64| {
            let cfg = IntegratorConfig::new(dt, 10.0, 1_000_000, 1.0).unwrap();
            let mut s: Vec<TrajectoryState> = Vec::new();
            integrate(&cfg, &p, &sched, &no_source(16), &initial, &mut s).unwrap();
            s.last().unwrap().u.clone()
        };
        let reference = run(1e-4);
        let err_coarse = linalg::max_abs(&linalg::sub(&run(1e-2), &reference));
        let err_fine = linalg::max_abs(&linalg::sub(&run(1e-3), &reference));
        let ratio = err_coarse / err_fine;
        assert!(
            (10.0_f64.powf(3.5)..=10.0_f64.powf(4.5)).contains(&ratio),
            "ratio {ratio}"
        );
    }

    #[test]
    fn determinism_bitwise() {
        let p = ConvexProblem::even_quartic(vec![1.0, 2.0]).unwrap();
        let sched = DampingSchedule::power(1.5, 0.3, 0.0).unwrap();
        let src = SourceTerm::from_seed(
            SourceFamily::PowerDecay { c: 0.5, beta: 2.0 },
            2,
            1.0,
            7,
        )
        .unwrap();
        let cfg = IntegratorConfig::new(5e-3, 20.0, 100, 0.5).unwrap();
        let initial = TrajectoryState::new(0.0, vec![1.0, -1.0], vec![0.0, 0.5]).unwrap();
        let run = || {
            let mut s: Vec<TrajectoryState> = Vec::new();
            integrate(&cfg, &p, &sched, &src, &initial, &mut s).unwrap();
            s
        };
        let a = run();
        let b = run();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.u, y.u);
            assert_eq!(x.v, y.v);
        }
    }
}

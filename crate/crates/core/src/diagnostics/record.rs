//! Trajectory diagnostics: the sampled series every verdict is built on.

use crate::dynamics::{self, IntegratorConfig, Observer, TrajectoryState};
use crate::problem::{ConvexProblem, DampingSchedule, NormTriple, SourceTerm};
use crate::{Error, Result};

use super::tail::TailModel;

#[derive(Debug, Clone)]
pub struct DiagnosticsConfig {
    /// Decay rates whose weighted velocity integrals are accumulated.
    pub nu_list: Vec<f64>,
    /// Final fraction of the record used by the decay fit.
    pub window_fraction: f64,
    /// Uniform checkpoints placed in `[T/2, T]` (geometric ones are added
    /// automatically at `T/2, T/4, ...`).
    pub uniform_checkpoints: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { nu_list: Vec::new(), window_fraction: 0.5, uniform_checkpoints: 16 }
    }
}

/// Index-aligned sampled series of one trajectory.
#[derive(Debug, Clone)]
pub struct EnergyRecord {
    pub alpha: f64,
    pub t: Vec<f64>,
    /// `E = |u'|_H^2 / 2 + Phi(u) - Phi*`.
    pub energy: Vec<f64>,
    /// Modified energy `E + int_t^inf |g|^2/(4 gamma)`; equals `energy` when
    /// the tail is unavailable (then `etilde_is_plain` is set).
    pub etilde: Vec<f64>,
    pub etilde_is_plain: bool,
    /// Anchor `p = |u - u*|_H^2 / 2`.
    pub anchor: Vec<f64>,
    /// `|u'|_H`.
    pub speed: Vec<f64>,
    /// `||u - u*||_V`.
    pub dist_v: Vec<f64>,
    /// `||grad Phi(u)||_{V'}`.
    pub gradnorm_vp: Vec<f64>,
    /// `<g(t), u'(t)>_H`, kept so the energy identity can be checked from
    /// the record alone.
    pub source_pairing: Vec<f64>,
    pub nu_list: Vec<f64>,
    /// `I_nu(t) = int_0^t (1+s)^{nu - alpha} |u'|_H^2 ds`, one series per nu,
    /// accumulated by trapezoid at sampling resolution.
    pub velocity_integrals: Vec<Vec<f64>>,
    /// `int_0^t (1+s)^alpha ||grad Phi(u)||_{V'} ds` (finite for the
    /// interior-minimum convergence estimate).
    pub grad_integral: Vec<f64>,
    /// Sparse `(t, u, u')` snapshots for Cauchy checks.
    pub checkpoints: Vec<(f64, Vec<f64>, Vec<f64>)>,
    /// Running `sup_t |u(t)|_H`.
    pub sup_h_norm: f64,
}

impl EnergyRecord {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().unwrap_or(&0.0)
    }

    /// Uniform sampling interval, if the spacing is uniform.
    pub fn uniform_dt(&self) -> Option<f64> {
        if self.t.len() < 2 {
            return None;
        }
        let dt = self.t[1] - self.t[0];
        for w in self.t.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1e-12) {
                return None;
            }
        }
        Some(dt)
    }

    /// First sample index with `t >= time`.
    pub fn index_at(&self, time: f64) -> usize {
        self.t.partition_point(|&x| x < time)
    }

    /// Structural invariants: nonnegative energy and anchor, nondecreasing
    /// running integrals.
    pub fn validate_invariants(&self) -> Result<()> {
        if self.energy.iter().any(|&e| e < -1e-12 || !e.is_finite()) {
            return Err(Error::invalid("energy series dips below -1e-12"));
        }
        if self.anchor.iter().any(|&p| p < 0.0) {
            return Err(Error::invalid("anchor series is negative"));
        }
        for series in &self.velocity_integrals {
            if series.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::invalid("velocity integral is not nondecreasing"));
            }
        }
        Ok(())
    }
}

/// Observer that populates an [`EnergyRecord`] while a trajectory runs.
pub struct Recorder<'a> {
    problem: &'a ConvexProblem,
    schedule: &'a DampingSchedule,
    source: &'a SourceTerm,
    tail: TailModel,
    record: EnergyRecord,
    /// Sample times that should capture a full snapshot, sorted.
    checkpoint_times: Vec<f64>,
    checkpoint_cursor: usize,
    dt_sample: f64,
    grad_buf: Vec<f64>,
    tmp_buf: Vec<f64>,
    prev_velocity_weights: Vec<f64>,
    prev_grad_weight: f64,
    prev_t: f64,
}

impl<'a> Recorder<'a> {
    pub fn new(
        problem: &'a ConvexProblem,
        schedule: &'a DampingSchedule,
        source: &'a SourceTerm,
        integrator: &IntegratorConfig,
        diagnostics: &DiagnosticsConfig,
    ) -> Result<Self> {
        if !(diagnostics.window_fraction > 0.0 && diagnostics.window_fraction <= 1.0) {
            return Err(Error::invalid("window_fraction must lie in (0, 1]"));
        }
        let tail = TailModel::build(schedule, source);
        let etilde_is_plain = !tail.is_available();
        let t_end = integrator.t_end;
        let dt_sample = integrator.dt * integrator.sample_stride as f64;

        // Checkpoint schedule: geometric T/2^j plus uniform points in the
        // final window, snapped to the sampling grid by proximity matching.
        let mut times: Vec<f64> = Vec::new();
        if t_end > 0.0 {
            let mut g = t_end;
            while g >= 4.0 * dt_sample {
                times.push(g);
                g *= 0.5;
            }
            let m = diagnostics.uniform_checkpoints.max(2);
            for j in 0..m {
                times.push(t_end / 2.0 + (t_end / 2.0) * j as f64 / (m - 1) as f64);
            }
        }
        times.push(0.0);
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() < 0.5 * dt_sample);

        let n_nu = diagnostics.nu_list.len();
        let record = EnergyRecord {
            alpha: schedule.alpha(),
            t: Vec::new(),
            energy: Vec::new(),
            etilde: Vec::new(),
            etilde_is_plain,
            anchor: Vec::new(),
            speed: Vec::new(),
            dist_v: Vec::new(),
            gradnorm_vp: Vec::new(),
            source_pairing: Vec::new(),
            nu_list: diagnostics.nu_list.clone(),
            velocity_integrals: vec![Vec::new(); n_nu],
            grad_integral: Vec::new(),
            checkpoints: Vec::new(),
            sup_h_norm: 0.0,
        };
        let n = problem.dim();
        Ok(Recorder {
            problem,
            schedule,
            source,
            tail,
            record,
            checkpoint_times: times,
            checkpoint_cursor: 0,
            dt_sample,
            grad_buf: vec![0.0; n],
            tmp_buf: vec![0.0; n],
            prev_velocity_weights: vec![0.0; n_nu],
            prev_grad_weight: 0.0,
            prev_t: 0.0,
        })
    }

    pub fn finish(self) -> EnergyRecord {
        self.record
    }

    /// Snap checkpoints to the nearest sampled time as the cursor advances.
    fn is_checkpoint(&mut self, t: f64) -> bool {
        let radius = 0.5 * self.dt_sample;
        while self.checkpoint_cursor < self.checkpoint_times.len()
            && self.checkpoint_times[self.checkpoint_cursor] < t - radius
        {
            self.checkpoint_cursor += 1;
        }
        if self.checkpoint_cursor < self.checkpoint_times.len()
            && (self.checkpoint_times[self.checkpoint_cursor] - t).abs() <= radius
        {
            self.checkpoint_cursor += 1;
            return true;
        }
        false
    }
}

impl Observer for Recorder<'_> {
    fn observe(&mut self, _step: usize, state: &TrajectoryState) -> Result<()> {
        let p = self.problem;
        let rec = &mut self.record;
        let t = state.t;

        let speed2 = p.h_inner(&state.v, &state.v);
        let energy = 0.5 * speed2 + p.phi(&state.u)? - p.phi_star();
        let diff: Vec<f64> = state
            .u
            .iter()
            .zip(p.minimizer())
            .map(|(a, b)| a - b)
            .collect();
        let anchor = 0.5 * p.h_inner(&diff, &diff);
        let norms = NormTriple::new(p);
        let dist_v = norms.v_norm(&diff);
        p.grad_phi_into(&state.u, &mut self.grad_buf, &mut self.tmp_buf);
        let gradnorm_vp = norms.vprime_norm(&self.grad_buf)?;

        let etilde = if rec.etilde_is_plain {
            energy
        } else {
            energy + self.tail.evaluate(self.schedule, self.source, t)?
        };
        let pairing = if self.source.is_zero() {
            0.0
        } else {
            self.source.eval_into(t, &mut self.tmp_buf);
            p.h_inner(&self.tmp_buf, &state.v)
        };

        // Trapezoid accumulation of the running integrals.
        let alpha = rec.alpha;
        let grad_weight = (1.0 + t).powf(alpha) * gradnorm_vp;
        if rec.t.is_empty() {
            for series in rec.velocity_integrals.iter_mut() {
                series.push(0.0);
            }
            rec.grad_integral.push(0.0);
        } else {
            let dt = t - self.prev_t;
            for (j, &nu) in rec.nu_list.iter().enumerate() {
                let w = (1.0 + t).powf(nu - alpha) * speed2;
                let prev = self.prev_velocity_weights[j];
                let last = *rec.velocity_integrals[j].last().unwrap();
                rec.velocity_integrals[j].push(last + 0.5 * dt * (prev + w));
            }
            let last = *rec.grad_integral.last().unwrap();
            rec.grad_integral
                .push(last + 0.5 * dt * (self.prev_grad_weight + grad_weight));
        }
        for (j, &nu) in rec.nu_list.iter().enumerate() {
            self.prev_velocity_weights[j] = (1.0 + t).powf(nu - alpha) * speed2;
        }
        self.prev_grad_weight = grad_weight;
        self.prev_t = t;

        let h_norm = p.h_norm(&state.u);
        if h_norm > rec.sup_h_norm {
            rec.sup_h_norm = h_norm;
        }

        rec.t.push(t);
        rec.energy.push(energy);
        rec.etilde.push(etilde);
        rec.anchor.push(anchor);
        rec.speed.push(speed2.max(0.0).sqrt());
        rec.dist_v.push(dist_v);
        rec.gradnorm_vp.push(gradnorm_vp);
        rec.source_pairing.push(pairing);

        if self.is_checkpoint(t) {
            self.record
                .checkpoints
                .push((t, state.u.clone(), state.v.clone()));
        }
        Ok(())
    }
}

/// Integrate and collect diagnostics in one call. On instability the partial
/// record gathered so far is attached to the error.
pub fn simulate(
    integrator: &IntegratorConfig,
    problem: &ConvexProblem,
    schedule: &DampingSchedule,
    source: &SourceTerm,
    initial: &TrajectoryState,
    diagnostics: &DiagnosticsConfig,
) -> Result<EnergyRecord> {
    let mut recorder = Recorder::new(problem, schedule, source, integrator, diagnostics)?;
    match dynamics::integrate(integrator, problem, schedule, source, initial, &mut recorder) {
        Ok(()) => {
            let record = recorder.finish();
            record.validate_invariants()?;
            Ok(record)
        }
        Err(Error::Instability { t, step, .. }) => Err(Error::Instability {
            t,
            step,
            partial: Some(Box::new(recorder.finish())),
        }),
        Err(e) => Err(e),
    }
}

/// The step-refined oracle: identical inputs at `dt/10` with sampling aligned
/// to the coarse grid. Only tests and acceptance suites should need it.
pub fn reference_solve(
    integrator: &IntegratorConfig,
    problem: &ConvexProblem,
    schedule: &DampingSchedule,
    source: &SourceTerm,
    initial: &TrajectoryState,
    diagnostics: &DiagnosticsConfig,
) -> Result<EnergyRecord> {
    simulate(&integrator.refined(), problem, schedule, source, initial, diagnostics)
}

//! Line-oriented scenario configs.
//!
//! Format: `key = value` pairs grouped under bracketed section headers
//! (`[problem]`, `[damping]`, `[source]`, `[initial]`, `[integrator]`,
//! `[diagnostics]`, `[output]`); `#` starts a comment. The parser reports
//! every error it finds, not just the first.

use std::collections::BTreeMap;

use crate::dynamics::{self, IntegratorConfig, TrajectoryState};
use crate::diagnostics::DiagnosticsConfig;
use crate::problem::{
    ConvexProblem, DampingSchedule, ScalarNonlinearity, SourceFamily, SourceTerm,
};
use crate::rng::SplitMix64;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ProblemFamily {
    Quadratic,
    ShiftedQuartic,
    Wave,
    FlatBasin,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    /// Raw config text; its digest identifies the scenario in reports.
    pub raw: String,
    pub name: String,

    pub family: ProblemFamily,
    pub dimension: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub shift: f64,
    pub wave_cubic: bool,
    pub half_width: f64,

    pub k: f64,
    pub alpha: f64,
    pub t0: f64,
    pub scale: f64,
    pub damping_table: Option<Vec<(f64, f64)>>,

    pub source_family: SourceFamily,
    pub direction_seed: u64,

    pub offset_seed: u64,
    pub offset_magnitude: f64,
    pub v0_magnitude: f64,
    pub bump_profile: bool,

    pub dt: Option<f64>,
    pub t_end: f64,
    pub sample_stride: Option<usize>,
    pub stability_margin: f64,

    pub nu_list: Option<Vec<f64>>,
    pub window_fraction: f64,
    pub checkpoints: usize,

    pub output_path: String,
}

/// Everything a run needs, resolved from a config.
pub struct ScenarioParts {
    pub problem: ConvexProblem,
    pub schedule: DampingSchedule,
    pub source: SourceTerm,
    pub initial: TrajectoryState,
    pub integrator: IntegratorConfig,
    pub diagnostics: DiagnosticsConfig,
}

const SECTIONS: &[&str] =
    &["problem", "damping", "source", "initial", "integrator", "diagnostics", "output"];

struct RawConfig {
    entries: BTreeMap<(String, String), (usize, String)>,
    errors: Vec<String>,
}

impl RawConfig {
    fn parse(text: &str) -> Self {
        let mut entries = BTreeMap::new();
        let mut errors = Vec::new();
        let mut section: Option<String> = None;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(stripped) = line.strip_prefix('[') {
                match stripped.strip_suffix(']') {
                    Some(name) if SECTIONS.contains(&name) => {
                        section = Some(name.to_string());
                    }
                    Some(name) => {
                        errors.push(format!("line {line_no}: unknown section [{name}]"));
                        section = None;
                    }
                    None => errors.push(format!("line {line_no}: malformed section header")),
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(format!("line {line_no}: expected `key = value`, got `{line}`"));
                continue;
            };
            let Some(section) = section.clone() else {
                errors.push(format!("line {line_no}: `{}` appears before any section", key.trim()));
                continue;
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if entries.insert((section.clone(), key.clone()), (line_no, value)).is_some() {
                errors.push(format!("line {line_no}: duplicate key `{key}` in [{section}]"));
            }
        }
        RawConfig { entries, errors }
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.entries.remove(&(section.to_string(), key.to_string()))
    }

    fn take_parsed<T: std::str::FromStr>(
        &mut self,
        section: &str,
        key: &str,
        default: T,
    ) -> T {
        match self.take(section, key) {
            None => default,
            Some((line, value)) => match value.parse::<T>() {
                Ok(v) => v,
                Err(_) => {
                    self.errors.push(format!(
                        "line {line}: cannot parse `{value}` for {section}.{key}"
                    ));
                    default
                }
            },
        }
    }

    fn finish_unknown_keys(&mut self) {
        for ((section, key), (line, _)) in &self.entries {
            self.errors.push(format!("line {line}: unknown key `{key}` in [{section}]"));
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<ScenarioConfig> {
        Self::parse_named("scenario", text)
    }

    pub fn parse_named(name: &str, text: &str) -> Result<ScenarioConfig> {
        let mut raw = RawConfig::parse(text);
        let mut errors = Vec::new();

        for required in ["problem", "damping"] {
            if !raw.entries.keys().any(|(s, _)| s == required) {
                errors.push(format!("missing section [{required}]"));
            }
        }

        let family = match raw.take("problem", "family") {
            Some((_, v)) => match v.as_str() {
                "quadratic" => ProblemFamily::Quadratic,
                "shifted_quartic" => ProblemFamily::ShiftedQuartic,
                "wave" => ProblemFamily::Wave,
                "flat_basin" => ProblemFamily::FlatBasin,
                other => {
                    errors.push(format!(
                        "problem.family must be quadratic | shifted_quartic | wave | flat_basin, got `{other}`"
                    ));
                    ProblemFamily::Quadratic
                }
            },
            None => {
                errors.push("problem.family is required".to_string());
                ProblemFamily::Quadratic
            }
        };
        let dimension = raw.take_parsed("problem", "dimension", 1usize);
        let lambda_min = raw.take_parsed("problem", "lambda_min", 1.0f64);
        let lambda_max =
            raw.take_parsed("problem", "lambda_max", lambda_min + (dimension.max(1) - 1) as f64);
        let shift = raw.take_parsed("problem", "shift", 2.0f64);
        let wave_cubic = match raw.take("problem", "nonlinearity") {
            None => true,
            Some((_, v)) => match v.as_str() {
                "cubic" => true,
                "none" => false,
                other => {
                    errors.push(format!("problem.nonlinearity must be cubic | none, got `{other}`"));
                    true
                }
            },
        };
        let half_width = raw.take_parsed("problem", "half_width", 1.0f64);

        if dimension == 0 {
            errors.push("problem.dimension must be at least 1".to_string());
        }
        if family == ProblemFamily::Wave && dimension < 2 {
            errors.push("wave problems need dimension >= 2".to_string());
        }
        if lambda_min < 0.0 || lambda_max < lambda_min {
            errors.push(format!(
                "problem spectrum must satisfy 0 <= lambda_min <= lambda_max, got [{lambda_min}, {lambda_max}]"
            ));
        }

        let k = raw.take_parsed("damping", "K", 1.0f64);
        let alpha = raw.take_parsed("damping", "alpha", 0.5f64);
        let t0 = raw.take_parsed("damping", "t0", 0.0f64);
        let scale = raw.take_parsed("damping", "scale", 1.0f64);
        let damping_table = raw.take("damping", "table").map(|(line, v)| {
            let mut pairs = Vec::new();
            for item in v.split(',') {
                match item.trim().split_once(':') {
                    Some((t, g)) => match (t.trim().parse::<f64>(), g.trim().parse::<f64>()) {
                        (Ok(t), Ok(g)) => pairs.push((t, g)),
                        _ => errors
                            .push(format!("line {line}: bad table entry `{}`", item.trim())),
                    },
                    None => {
                        errors.push(format!("line {line}: table entries are `t:gamma`, got `{}`", item.trim()))
                    }
                }
            }
            pairs
        });
        if !(k > 0.0) {
            errors.push(format!("damping.K must be positive, got {k}"));
        }
        if !(0.0..1.0).contains(&alpha) {
            errors.push(format!("damping.alpha must lie in [0, 1), got {alpha}"));
        }
        if t0 < 0.0 {
            errors.push(format!("damping.t0 must be nonnegative, got {t0}"));
        }
        if scale < 1.0 {
            errors.push(format!("damping.scale must be >= 1, got {scale}"));
        }

        let source_family = match raw.take("source", "family") {
            None => SourceFamily::Zero,
            Some((_, v)) => {
                let c = raw.take_parsed("source", "c", 1.0f64);
                let beta = raw.take_parsed("source", "beta", 2.0f64);
                let rate = raw.take_parsed("source", "rate", 1.0f64);
                let omega = raw.take_parsed("source", "omega", 1.0f64);
                match v.as_str() {
                    "zero" => SourceFamily::Zero,
                    "power_decay" => SourceFamily::PowerDecay { c, beta },
                    "exp_decay" => SourceFamily::ExpDecay { c, rate },
                    "modulated_power" => SourceFamily::ModulatedPower { c, beta, omega },
                    other => {
                        errors.push(format!(
                            "source.family must be zero | power_decay | exp_decay | modulated_power, got `{other}`"
                        ));
                        SourceFamily::Zero
                    }
                }
            }
        };
        if let SourceFamily::PowerDecay { c, beta } | SourceFamily::ModulatedPower { c, beta, .. } =
            &source_family
        {
            if *c < 0.0 {
                errors.push(format!("source.c must be nonnegative, got {c}"));
            }
            if !(*beta > 0.0) {
                errors.push(format!("source.beta must be positive, got {beta}"));
            }
        }
        if let SourceFamily::ExpDecay { c, rate } = &source_family {
            if *c < 0.0 {
                errors.push(format!("source.c must be nonnegative, got {c}"));
            }
            if !(*rate > 0.0) {
                errors.push(format!("source.rate must be positive, got {rate}"));
            }
        }
        let direction_seed = raw.take_parsed("source", "direction_seed", 1u64);

        let offset_seed = raw.take_parsed("initial", "offset_seed", 2u64);
        let offset_magnitude = raw.take_parsed("initial", "offset_magnitude", 1.0f64);
        let v0_magnitude = raw.take_parsed("initial", "v0_magnitude", 0.0f64);
        let bump_profile = match raw.take("initial", "profile") {
            None => false,
            Some((_, v)) => match v.as_str() {
                "bump" => true,
                "random" => false,
                other => {
                    errors.push(format!("initial.profile must be random | bump, got `{other}`"));
                    false
                }
            },
        };
        if offset_magnitude < 0.0 || v0_magnitude < 0.0 {
            errors.push("initial magnitudes must be nonnegative".to_string());
        }

        let dt = match raw.take("integrator", "dt") {
            None => None,
            Some((line, v)) => match v.parse::<f64>() {
                Ok(x) if x > 0.0 => Some(x),
                Ok(x) => {
                    errors.push(format!("line {line}: integrator.dt must be positive, got {x}"));
                    None
                }
                Err(_) => {
                    errors.push(format!("line {line}: cannot parse `{v}` for integrator.dt"));
                    None
                }
            },
        };
        let t_end = raw.take_parsed("integrator", "t_end", 1.0e3f64);
        if !(t_end > 0.0) {
            errors.push(format!("integrator.t_end must be positive, got {t_end}"));
        }
        let sample_stride = match raw.take("integrator", "sample_stride") {
            None => None,
            Some((line, v)) => match v.parse::<usize>() {
                Ok(x) if x >= 1 => Some(x),
                _ => {
                    errors.push(format!("line {line}: sample_stride must be a positive integer"));
                    None
                }
            },
        };
        let stability_margin = raw.take_parsed("integrator", "stability_margin", 0.5f64);
        if !(stability_margin > 0.0 && stability_margin <= 1.0) {
            errors.push(format!(
                "integrator.stability_margin must lie in (0, 1], got {stability_margin}"
            ));
        }

        let nu_list = raw.take("diagnostics", "nu_list").map(|(line, v)| {
            let mut list = Vec::new();
            for item in v.split(',') {
                match item.trim().parse::<f64>() {
                    Ok(nu) => list.push(nu),
                    Err(_) => errors
                        .push(format!("line {line}: cannot parse `{}` in nu_list", item.trim())),
                }
            }
            list
        });
        if let Some(list) = &nu_list {
            for &nu in list {
                if !(0.0..1.0 + alpha).contains(&nu) {
                    errors.push(format!(
                        "nu = {nu} out of range for decay verdicts: requires 0 <= nu < 1 + alpha = {}",
                        1.0 + alpha
                    ));
                }
            }
        }
        let window_fraction = raw.take_parsed("diagnostics", "window_fraction", 0.5f64);
        if !(window_fraction > 0.0 && window_fraction <= 1.0) {
            errors.push(format!("diagnostics.window_fraction must lie in (0, 1], got {window_fraction}"));
        }
        let checkpoints = raw.take_parsed("diagnostics", "checkpoints", 16usize);

        let output_path = raw
            .take("output", "path")
            .map(|(_, v)| v)
            .unwrap_or_else(|| format!("{name}.csv"));

        raw.finish_unknown_keys();
        errors.extend(raw.errors);
        if !errors.is_empty() {
            return Err(Error::Config(errors));
        }

        Ok(ScenarioConfig {
            raw: text.to_string(),
            name: name.to_string(),
            family,
            dimension,
            lambda_min,
            lambda_max,
            shift,
            wave_cubic,
            half_width,
            k,
            alpha,
            t0,
            scale,
            damping_table,
            source_family,
            direction_seed,
            offset_seed,
            offset_magnitude,
            v0_magnitude,
            bump_profile,
            dt,
            t_end,
            sample_stride,
            stability_margin,
            nu_list,
            window_fraction,
            checkpoints,
            output_path,
        })
    }

    /// FNV-1a hash of the raw text, the scenario's identity in reports.
    pub fn digest(&self) -> String {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in self.raw.bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }

    /// Resolve the config into runnable pieces, filling the deferred
    /// defaults (dt from the stability guard, stride from the step count,
    /// nu list from `2 alpha`).
    pub fn build(&self) -> Result<ScenarioParts> {
        let problem = match self.family {
            ProblemFamily::Quadratic => ConvexProblem::quadratic(self.spectrum())?,
            ProblemFamily::ShiftedQuartic => {
                ConvexProblem::shifted_quartic(self.spectrum(), self.shift)?
            }
            ProblemFamily::Wave => ConvexProblem::wave(
                self.dimension,
                self.wave_cubic.then_some(ScalarNonlinearity::Cubic),
            )?,
            ProblemFamily::FlatBasin => ConvexProblem::flat_basin(self.dimension, self.half_width)?,
        };
        let schedule = match &self.damping_table {
            Some(table) => DampingSchedule::tabulated(self.k, self.alpha, self.t0, table.clone())?,
            None if self.scale > 1.0 => {
                DampingSchedule::scaled_power(self.k, self.alpha, self.t0, self.scale)?
            }
            None => DampingSchedule::power(self.k, self.alpha, self.t0)?,
        };
        let source = SourceTerm::from_seed(
            self.source_family.clone(),
            problem.dim(),
            problem.mass_weight(),
            self.direction_seed,
        )?;

        let initial = self.initial_state(&problem)?;
        let dt = match self.dt {
            Some(dt) => dt,
            None => {
                let limit = dynamics::max_stable_dt(&problem, &initial, self.stability_margin);
                if !limit.is_finite() {
                    // Pure drift problems have no curvature scale; fall back
                    // to a horizon-based default.
                    self.t_end / 1.0e4
                } else {
                    limit * 0.999
                }
            }
        };
        let stride = match self.sample_stride {
            Some(s) => s,
            None => ((self.t_end / dt) / 2.0e4).ceil().max(1.0) as usize,
        };
        let integrator = IntegratorConfig::new(dt, self.t_end, stride, self.stability_margin)?;
        let diagnostics = DiagnosticsConfig {
            nu_list: self.nu_list.clone().unwrap_or_else(|| vec![2.0 * self.alpha]),
            window_fraction: self.window_fraction,
            uniform_checkpoints: self.checkpoints,
        };
        Ok(ScenarioParts { problem, schedule, source, initial, integrator, diagnostics })
    }

    fn spectrum(&self) -> Vec<f64> {
        let n = self.dimension;
        if n == 1 {
            return vec![self.lambda_min];
        }
        (0..n)
            .map(|i| {
                self.lambda_min + (self.lambda_max - self.lambda_min) * i as f64 / (n - 1) as f64
            })
            .collect()
    }

    fn initial_state(&self, problem: &ConvexProblem) -> Result<TrajectoryState> {
        let n = problem.dim();
        let h = problem.mass_weight();
        let mut u = problem.minimizer().to_vec();
        if self.offset_magnitude > 0.0 {
            let offset = if self.bump_profile {
                let mut bump: Vec<f64> = (1..=n)
                    .map(|i| (std::f64::consts::PI * i as f64 / (n as f64 + 1.0)).sin())
                    .collect();
                let norm = (h * bump.iter().map(|x| x * x).sum::<f64>()).sqrt();
                for x in &mut bump {
                    *x /= norm;
                }
                bump
            } else {
                SplitMix64::new(self.offset_seed).unit_vector(n, h)
            };
            for i in 0..n {
                u[i] += self.offset_magnitude * offset[i];
            }
        }
        let v = if self.v0_magnitude > 0.0 {
            let dir = SplitMix64::new(self.offset_seed.wrapping_add(1)).unit_vector(n, h);
            dir.iter().map(|x| self.v0_magnitude * x).collect()
        } else {
            vec![0.0; n]
        };
        TrajectoryState::new(0.0, u, v)
    }
}

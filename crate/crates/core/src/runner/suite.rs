//! Pinned scenario suites and their aggregate reports.
//!
//! Suites are defined as config texts so every run exercises the parser and
//! the report digest identifies the exact cell. Scenario executions are
//! independent; workers pull indices from a shared counter and write results
//! into their own slot, so aggregation order (and every emitted byte) is
//! independent of the thread count.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::diagnostics::{lemma1_check, tau0, Lemma1Report};
use crate::problem::{DampingReport, DampingSchedule, SourceClassification};
use crate::runner::config::ScenarioConfig;
use crate::runner::scenario::{self, ScenarioOutcome, VerdictBlock};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Theorem1,
    Theorem2,
    Theorem3,
    Theorem4,
    Prop1,
    Lemma1,
    Wave,
    Probes,
    All,
}

impl std::str::FromStr for SuiteName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "theorem1" => SuiteName::Theorem1,
            "theorem2" => SuiteName::Theorem2,
            "theorem3" => SuiteName::Theorem3,
            "theorem4" => SuiteName::Theorem4,
            "prop1" => SuiteName::Prop1,
            "lemma1" => SuiteName::Lemma1,
            "wave" => SuiteName::Wave,
            "probes" => SuiteName::Probes,
            "all" => SuiteName::All,
            other => {
                return Err(Error::invalid(format!(
                    "unknown suite `{other}`; expected theorem1..4, prop1, lemma1, wave, probes, all"
                )))
            }
        })
    }
}

impl std::fmt::Display for SuiteName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SuiteName::Theorem1 => "theorem1",
            SuiteName::Theorem2 => "theorem2",
            SuiteName::Theorem3 => "theorem3",
            SuiteName::Theorem4 => "theorem4",
            SuiteName::Prop1 => "prop1",
            SuiteName::Lemma1 => "lemma1",
            SuiteName::Wave => "wave",
            SuiteName::Probes => "probes",
            SuiteName::All => "all",
        };
        f.write_str(s)
    }
}

#[allow(clippy::too_many_arguments)]
fn quadratic_cell(
    name: &str,
    n: usize,
    k: f64,
    alpha: f64,
    source: &str,
    initial: &str,
    t_end: f64,
    dt: f64,
    stride: usize,
    diagnostics: &str,
) -> (String, String) {
    let lambda_max = if n == 1 { 1.0 } else { 4.0 };
    let text = format!(
        "[problem]\nfamily = quadratic\ndimension = {n}\nlambda_min = 1.0\nlambda_max = {lambda_max}\n\n\
         [damping]\nK = {k}\nalpha = {alpha}\n\n{source}{initial}\
         [integrator]\ndt = {dt}\nt_end = {t_end}\nsample_stride = {stride}\n\n\
         [diagnostics]\n{diagnostics}\n\n[output]\npath = {name}.csv\n"
    );
    (name.to_string(), text)
}

/// The pinned scenario matrix of each suite.
pub fn scenario_texts(name: SuiteName) -> Vec<(String, String)> {
    let mut cells: Vec<(String, String)> = Vec::new();
    let push_all = name == SuiteName::All;

    if push_all || name == SuiteName::Theorem1 {
        for &alpha in &[0.25, 0.5, 0.75] {
            for &n in &[1usize, 4] {
                let beta = 1.2 + alpha;
                let cell = quadratic_cell(
                    &format!("th1_a{:02}_n{n}", (alpha * 100.0) as u32),
                    n,
                    2.0,
                    alpha,
                    &format!(
                        "[source]\nfamily = power_decay\nc = 0.5\nbeta = {beta}\ndirection_seed = 11\n\n"
                    ),
                    "[initial]\noffset_seed = 7\noffset_magnitude = 1.0\n\n",
                    1.0e4,
                    5e-3,
                    200,
                    "window_fraction = 0.5",
                );
                cells.push(cell);
            }
        }
    }
    if push_all || name == SuiteName::Theorem2 {
        for &alpha in &[0.3, 0.5] {
            cells.push(quadratic_cell(
                &format!("th2_a{:02}", (alpha * 100.0) as u32),
                4,
                2.0,
                alpha,
                "[source]\nfamily = power_decay\nc = 1.0\nbeta = 1.75\ndirection_seed = 13\n\n",
                "[initial]\noffset_seed = 9\noffset_magnitude = 3.0\nv0_magnitude = 1.0\n\n",
                1.0e4,
                5e-3,
                200,
                "window_fraction = 0.5",
            ));
        }
    }
    if push_all || name == SuiteName::Theorem3 {
        let quartic = |name: &str, n: usize, alpha: f64, source: &str| {
            let text = format!(
                "[problem]\nfamily = shifted_quartic\ndimension = {n}\nlambda_min = 1.0\nlambda_max = {}\nshift = 0.0\n\n\
                 [damping]\nK = 2.0\nalpha = {alpha}\n\n{source}\
                 [initial]\noffset_seed = 5\noffset_magnitude = 1.5\n\n\
                 [integrator]\ndt = 5e-3\nt_end = 1e4\nsample_stride = 200\n\n\
                 [output]\npath = {name}.csv\n",
                if n == 1 { 1.0 } else { 4.0 }
            );
            (name.to_string(), text)
        };
        cells.push(quartic(
            "th3_power",
            4,
            0.5,
            "[source]\nfamily = power_decay\nc = 0.5\nbeta = 2.0\ndirection_seed = 17\n\n",
        ));
        cells.push(quartic("th3_zero", 4, 0.5, ""));
        cells.push(quartic("th3_zero_a03", 1, 0.3, ""));
    }
    if push_all || name == SuiteName::Theorem4 {
        let basin = |name: &str, source: &str| {
            let text = format!(
                "[problem]\nfamily = flat_basin\ndimension = 4\nhalf_width = 1.0\n\n\
                 [damping]\nK = 2.0\nalpha = 0.5\n\n{source}\
                 [initial]\noffset_seed = 3\noffset_magnitude = 2.5\n\n\
                 [integrator]\ndt = 2e-3\nt_end = 1e4\nsample_stride = 500\n\n\
                 [output]\npath = {name}.csv\n"
            );
            (name.to_string(), text)
        };
        cells.push(basin("th4_zero", ""));
        cells.push(basin(
            "th4_power",
            "[source]\nfamily = power_decay\nc = 0.1\nbeta = 2.0\ndirection_seed = 19\n\n",
        ));
    }
    if push_all || name == SuiteName::Prop1 {
        cells.push(quadratic_cell(
            "prop1_b175",
            4,
            2.0,
            0.5,
            "[source]\nfamily = power_decay\nc = 1.0\nbeta = 1.75\ndirection_seed = 23\n\n",
            "[initial]\noffset_seed = 21\noffset_magnitude = 1.0\n\n",
            1.0e4,
            5e-3,
            200,
            "nu_list = 1.0, 1.3\nwindow_fraction = 0.5",
        ));
    }
    if push_all || name == SuiteName::Wave {
        cells.push((
            "wave_cubic".to_string(),
            "[problem]\nfamily = wave\ndimension = 64\nnonlinearity = cubic\n\n\
             [damping]\nK = 3.0\nalpha = 0.5\n\n\
             [source]\nfamily = exp_decay\nc = 1.0\nrate = 0.05\ndirection_seed = 29\n\n\
             [initial]\nprofile = bump\noffset_magnitude = 1.0\n\n\
             [integrator]\ndt = 1e-2\nt_end = 5e3\nsample_stride = 100\n\n\
             [diagnostics]\nnu_list = 1.0\n\n\
             [output]\npath = wave_cubic.csv\n"
                .to_string(),
        ));
    }
    if push_all || name == SuiteName::Probes {
        cells.push(quadratic_cell(
            "probe_op_fails",
            2,
            2.0,
            0.5,
            "[source]\nfamily = power_decay\nc = 1.0\nbeta = 1.2\ndirection_seed = 31\n\n",
            "[initial]\noffset_seed = 33\noffset_magnitude = 1.0\n\n",
            2.0e3,
            5e-3,
            200,
            "window_fraction = 0.5",
        ));
        // Tabulated gamma decaying faster than the declared exponent: the
        // lower-bound hypothesis fails on any grid.
        let table: Vec<String> = (0..=100)
            .map(|i| {
                let t = i as f64;
                format!("{t}:{}", 1.0 / (1.0 + t))
            })
            .collect();
        cells.push((
            "probe_h1_fails".to_string(),
            format!(
                "[problem]\nfamily = quadratic\ndimension = 1\n\n\
                 [damping]\nK = 1.0\nalpha = 0.5\ntable = {}\n\n\
                 [initial]\noffset_seed = 35\noffset_magnitude = 1.0\n\n\
                 [integrator]\ndt = 1e-2\nt_end = 200\nsample_stride = 10\n\n\
                 [output]\npath = probe_h1_fails.csv\n",
                table.join(", ")
            ),
        ));
    }
    cells
}

pub fn scenario_configs(name: SuiteName) -> Result<Vec<ScenarioConfig>> {
    scenario_texts(name)
        .into_iter()
        .map(|(cell, text)| ScenarioConfig::parse_named(&cell, &text))
        .collect()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LatticeCell {
    pub k: f64,
    pub alpha: f64,
    pub tau: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LatticeReport {
    pub cells: Vec<LatticeCell>,
    pub all_pass: bool,
}

/// The 120-cell damping-integral lattice:
/// `K in {0.5, 1, 2} x alpha in {0, 0.3, 0.5, 0.7} x 10 tau values >= tau0`.
pub fn lemma_lattice() -> Result<LatticeReport> {
    let mut cells = Vec::with_capacity(120);
    for &k in &[0.5, 1.0, 2.0] {
        for &alpha in &[0.0, 0.3, 0.5, 0.7] {
            let schedule = DampingSchedule::power(k, alpha, 0.0)?;
            let base = tau0(&schedule);
            for j in 0..10 {
                let tau = base + (2.0_f64.powi(j) - 1.0);
                let Lemma1Report { lhs, rhs, pass, .. } =
                    lemma1_check(&schedule, tau, tau + 10.0)?;
                cells.push(LatticeCell { k, alpha, tau, lhs, rhs, pass });
            }
        }
    }
    let all_pass = cells.iter().all(|c| c.pass);
    Ok(LatticeReport { cells, all_pass })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub digest: String,
    pub classification: Option<SourceClassification>,
    pub damping: Option<DampingReport>,
    pub verdicts: Option<VerdictBlock>,
    /// Set when the scenario could not complete (instability, i/o).
    pub hard_failure: Option<String>,
}

impl ScenarioReport {
    fn from_outcome(outcome: &ScenarioOutcome) -> Self {
        ScenarioReport {
            name: outcome.name.clone(),
            digest: outcome.digest.clone(),
            classification: Some(outcome.classification.clone()),
            damping: Some(outcome.damping.clone()),
            verdicts: Some(outcome.verdicts.clone()),
            hard_failure: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.hard_failure.is_none()
            && self.verdicts.as_ref().map(|v| v.overall_pass).unwrap_or(false)
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub scenarios: Vec<ScenarioReport>,
    pub lattice: Option<LatticeReport>,
    pub overall_pass: bool,
}

/// Concurrency cap: `VANDAMP_THREADS`, defaulting to the machine parallelism.
pub fn threads_from_env() -> usize {
    std::env::var("VANDAMP_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8)
        })
}

/// Execute a suite: per-scenario CSVs plus `summary.json` under `out_dir`.
///
/// Reruns with identical configs are byte-identical regardless of the
/// thread count; wall-clock timings go to stderr only.
pub fn run_suite(name: SuiteName, out_dir: &Path, threads: usize) -> Result<SuiteReport> {
    std::fs::create_dir_all(out_dir)?;
    let configs = scenario_configs(name)?;

    let slots: Vec<Mutex<Option<ScenarioReport>>> =
        configs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = threads.max(1).min(configs.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= configs.len() {
                    break;
                }
                let config = &configs[idx];
                let started = std::time::Instant::now();
                let report = match scenario::run_scenario(config, Some(out_dir)) {
                    Ok(outcome) => ScenarioReport::from_outcome(&outcome),
                    Err(e) => ScenarioReport {
                        name: config.name.clone(),
                        digest: config.digest(),
                        classification: None,
                        damping: None,
                        verdicts: None,
                        hard_failure: Some(e.to_string()),
                    },
                };
                eprintln!(
                    "scenario {}: {:.2}s{}",
                    config.name,
                    started.elapsed().as_secs_f64(),
                    report.hard_failure.as_deref().map(|m| format!(" [failed: {m}]")).unwrap_or_default(),
                );
                *slots[idx].lock().unwrap() = Some(report);
            });
        }
    });

    let scenarios: Vec<ScenarioReport> = slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("worker filled every slot"))
        .collect();

    let lattice = if name == SuiteName::Lemma1 || name == SuiteName::All {
        Some(lemma_lattice()?)
    } else {
        None
    };

    let overall_pass = scenarios.iter().all(|s| s.passed())
        && lattice.as_ref().map(|l| l.all_pass).unwrap_or(true);

    let report = SuiteReport { suite: name.to_string(), scenarios, lattice, overall_pass };
    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::invalid(format!("report serialization failed: {e}")))?;
    json.push('\n');
    std::fs::write(out_dir.join("summary.json"), json)?;
    Ok(report)
}

//! Single-scenario execution: run the trajectory, compute every applicable
//! verdict, and persist the sampled series.
//!
//! A scenario whose hypotheses fail a given statement is marked a probe for
//! that statement: its results are reported but never gate an exit code
//! (sufficiency is what the statements assert, not necessity).

use std::path::Path;

use crate::diagnostics::{self, EnergyRecord};
use crate::problem::{DampingReport, NormKind, SourceClassification};
use crate::runner::config::{ScenarioConfig, ScenarioParts};
use crate::runner::csv;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "status", content = "details")]
pub enum TheoremVerdict {
    /// Hypotheses hold and the numerical check passed.
    Pass(String),
    /// Hypotheses hold but the numerical check failed.
    Fail(String),
    /// Hypotheses do not hold; informational only.
    Probe(String),
}

impl TheoremVerdict {
    pub fn gates(&self) -> bool {
        !matches!(self, TheoremVerdict::Probe(_))
    }

    pub fn passed(&self) -> bool {
        matches!(self, TheoremVerdict::Pass(_))
    }

    fn ok(&self) -> bool {
        !matches!(self, TheoremVerdict::Fail(_))
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct NuVerdict {
    pub nu: f64,
    pub verdict: TheoremVerdict,
}

/// One verdict per statement the scenario's hypotheses select.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct VerdictBlock {
    pub weak_convergence_rate: TheoremVerdict,
    pub boundedness: TheoremVerdict,
    pub strong_convergence_even: TheoremVerdict,
    pub strong_convergence_interior: TheoremVerdict,
    pub general_rates: Vec<NuVerdict>,
    pub overall_pass: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ScenarioOutcome {
    pub name: String,
    pub digest: String,
    pub classification: SourceClassification,
    pub damping: DampingReport,
    pub verdicts: VerdictBlock,
    #[serde(skip)]
    pub record: EnergyRecord,
}

/// Exit-code mapping: 0 pass (probes included), 1 verdict failure,
/// 2 numerical instability, 3 i/o failure.
pub fn exit_code(result: &Result<ScenarioOutcome>) -> i32 {
    match result {
        Ok(outcome) => {
            if outcome.verdicts.overall_pass {
                0
            } else {
                1
            }
        }
        Err(Error::Instability { .. }) => 2,
        Err(Error::Io(_)) => 3,
        Err(_) => 1,
    }
}

pub fn run_scenario(config: &ScenarioConfig, out_dir: Option<&Path>) -> Result<ScenarioOutcome> {
    let parts = config.build()?;
    let record = diagnostics::simulate(
        &parts.integrator,
        &parts.problem,
        &parts.schedule,
        &parts.source,
        &parts.initial,
        &parts.diagnostics,
    )?;

    let outcome = evaluate(config, &parts, record)?;
    let path = match out_dir {
        Some(dir) => dir.join(&config.output_path),
        None => std::path::PathBuf::from(&config.output_path),
    };
    csv::emit_csv(&outcome.record, &path)?;
    Ok(outcome)
}

/// Compute every verdict from an already-integrated record.
pub fn evaluate(
    config: &ScenarioConfig,
    parts: &ScenarioParts,
    record: EnergyRecord,
) -> Result<ScenarioOutcome> {
    let classification = parts.source.classify(&parts.schedule);
    let grid: Vec<f64> = (0..=200)
        .map(|i| parts.schedule.t0() + (config.t_end - parts.schedule.t0()) * i as f64 / 200.0)
        .collect();
    let damping = parts.schedule.check_hypotheses(&grid)?;

    let alpha = parts.schedule.alpha();
    let two_alpha = 2.0 * alpha;
    let problem = &parts.problem;
    let u_final: Vec<f64> = record
        .checkpoints
        .last()
        .map(|(_, u, _)| u.clone())
        .unwrap_or_else(|| problem.minimizer().to_vec());

    let hypotheses_hold = damping.all_hold();
    let probe_damping = "damping hypotheses fail on the grid".to_string();

    // Rate + weak-convergence surrogate at nu = 2 alpha.
    let weak_convergence_rate = if !hypotheses_hold {
        TheoremVerdict::Probe(probe_damping.clone())
    } else if !classification.op_integrable {
        TheoremVerdict::Probe("source violates the weighted integrability condition".into())
    } else {
        rate_verdict(&record, two_alpha, problem, &u_final, true)
    };

    // Boundedness: the square condition at 3 alpha promotes the rate result
    // without assuming a bounded trajectory.
    let boundedness = if !hypotheses_hold {
        TheoremVerdict::Probe(probe_damping.clone())
    } else if !(classification.op_integrable && classification.th2_square) {
        TheoremVerdict::Probe("source violates the square-integrability condition at 3 alpha".into())
    } else {
        match diagnostics::anchor_limit_check(&record) {
            Ok(anchor) => {
                let base = rate_verdict(&record, two_alpha, problem, &u_final, true);
                let detail = format!(
                    "sup |u|_H = {:.6e}, anchor oscillation {:.3e} (tol {:.3e})",
                    record.sup_h_norm, anchor.oscillation, anchor.tolerance
                );
                if base.ok() && anchor.limit_exists {
                    TheoremVerdict::Pass(detail)
                } else {
                    TheoremVerdict::Fail(detail)
                }
            }
            Err(e) => TheoremVerdict::Fail(format!("anchor limit check unavailable: {e}")),
        }
    };

    // Strong convergence for even potentials.
    let strong_convergence_even = if !hypotheses_hold {
        TheoremVerdict::Probe(probe_damping.clone())
    } else if !problem.is_even() {
        TheoremVerdict::Probe("potential is not even".into())
    } else if !(classification.op_integrable && classification.th3_square) {
        TheoremVerdict::Probe(
            "source violates the square-integrability condition at 2 alpha + 1".into(),
        )
    } else {
        strong_convergence_verdict(&record, problem, &u_final)
    };

    // Strong convergence when arg min has interior: the gradient-norm
    // integral must stay bounded as well.
    let strong_convergence_interior = if !hypotheses_hold {
        TheoremVerdict::Probe(probe_damping.clone())
    } else if !problem.argmin_has_interior() {
        TheoremVerdict::Probe("arg min has empty interior".into())
    } else if !classification.op_integrable {
        TheoremVerdict::Probe("source violates the weighted integrability condition".into())
    } else {
        let cauchy = diagnostics::cauchy_check(&record, problem, NormKind::V);
        let grad = diagnostics::grad_integral_verdict(&record);
        match (cauchy, grad) {
            (Ok(c), Ok(g)) => {
                let detail = format!(
                    "V-distance {:.3e} (tol {:.3e}); grad integral {:.6e}, last-decade fraction {:.3e}",
                    c.max_distance, c.tolerance, g.terminal, g.last_decade_fraction
                );
                if c.converged && g.bounded {
                    TheoremVerdict::Pass(detail)
                } else {
                    TheoremVerdict::Fail(detail)
                }
            }
            (c, g) => TheoremVerdict::Fail(format!(
                "checks unavailable: {:?} / {:?}",
                c.err().map(|e| e.to_string()),
                g.err().map(|e| e.to_string())
            )),
        }
    };

    // General rates at every configured nu.
    let mut general_rates = Vec::new();
    for &nu in &record.nu_list.clone() {
        let verdict = if !hypotheses_hold {
            TheoremVerdict::Probe(probe_damping.clone())
        } else if nu >= 1.0 + alpha {
            TheoremVerdict::Probe(format!("nu = {nu} is not below 1 + alpha"))
        } else if !parts.source.l1_weight_finite(nu / 2.0) {
            TheoremVerdict::Probe(format!(
                "source violates the weighted integrability condition at nu/2 = {}",
                nu / 2.0
            ))
        } else {
            rate_verdict(&record, nu, problem, &u_final, false)
        };
        general_rates.push(NuVerdict { nu, verdict });
    }

    let overall_pass = [
        &weak_convergence_rate,
        &boundedness,
        &strong_convergence_even,
        &strong_convergence_interior,
    ]
    .into_iter()
    .all(|v| v.ok())
        && general_rates.iter().all(|v| v.verdict.ok());

    Ok(ScenarioOutcome {
        name: config.name.clone(),
        digest: config.digest(),
        classification,
        damping,
        verdicts: VerdictBlock {
            weak_convergence_rate,
            boundedness,
            strong_convergence_even,
            strong_convergence_interior,
            general_rates,
            overall_pass,
        },
        record,
    })
}

fn rate_verdict(
    record: &EnergyRecord,
    nu: f64,
    problem: &crate::problem::ConvexProblem,
    u_final: &[f64],
    check_limit_membership: bool,
) -> TheoremVerdict {
    let trend = match diagnostics::scaled_energy_trend(record, nu) {
        Ok(t) => t,
        Err(e) => return TheoremVerdict::Fail(format!("trend unavailable: {e}")),
    };
    let velocity = record
        .nu_list
        .iter()
        .any(|&x| (x - nu).abs() <= 1e-12)
        .then(|| diagnostics::velocity_integral_verdict(record, nu));
    let membership = if check_limit_membership {
        Some(diagnostics::limit_candidate_check(problem, u_final))
    } else {
        None
    };

    let mut detail = format!("scaled-energy ratio {:.3e} at nu = {nu}", trend.ratio);
    let mut pass = trend.pass;
    match velocity {
        Some(Ok(v)) => {
            detail.push_str(&format!(
                "; velocity integral {:.6e}, last-decade fraction {:.3e}",
                v.terminal, v.last_decade_fraction
            ));
            pass &= v.bounded;
        }
        Some(Err(e)) => {
            detail.push_str(&format!("; velocity integral unavailable: {e}"));
            pass = false;
        }
        None => detail.push_str("; velocity integral not configured at this nu"),
    }
    match membership {
        Some(Ok(m)) => {
            detail.push_str(&format!(
                "; limit candidate gap {:.3e}, |grad|_V' {:.3e}",
                m.phi_gap, m.grad_vprime
            ));
            pass &= m.member;
        }
        Some(Err(e)) => {
            detail.push_str(&format!("; limit check unavailable: {e}"));
            pass = false;
        }
        None => {}
    }
    if pass {
        TheoremVerdict::Pass(detail)
    } else {
        TheoremVerdict::Fail(detail)
    }
}

fn strong_convergence_verdict(
    record: &EnergyRecord,
    problem: &crate::problem::ConvexProblem,
    u_final: &[f64],
) -> TheoremVerdict {
    let cauchy = match diagnostics::cauchy_check(record, problem, NormKind::V) {
        Ok(c) => c,
        Err(e) => return TheoremVerdict::Fail(format!("cauchy check unavailable: {e}")),
    };
    let membership = match diagnostics::limit_candidate_check(problem, u_final) {
        Ok(m) => m,
        Err(e) => return TheoremVerdict::Fail(format!("limit check unavailable: {e}")),
    };
    let detail = format!(
        "V-distance {:.3e} (tol {:.3e}); limit candidate gap {:.3e}, |grad|_V' {:.3e}",
        cauchy.max_distance, cauchy.tolerance, membership.phi_gap, membership.grad_vprime
    );
    if cauchy.converged && membership.member {
        TheoremVerdict::Pass(detail)
    } else {
        TheoremVerdict::Fail(detail)
    }
}

/// Dissipation audit used by the suite-level monotonicity criteria: largest
/// upward step of a series that must be nonincreasing.
pub fn max_monotonicity_violation(series: &[f64]) -> f64 {
    series
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0_f64, f64::max)
}

//! WebAssembly bindings for the browser demo.
//!
//! Three interactive operations, each returning JSON for the static page in
//! `www/`: simulate a scenario and return the decimated diagnostic series,
//! sweep the damping-integral bound over tau, and classify a config's
//! hypotheses. The JSON layer keeps the wasm ABI trivial; all numeric work
//! happens in `vandamp-core`.

use wasm_bindgen::prelude::*;

use vandamp_core::diagnostics::{lemma1_check, scaled_trend_series, tau0};
use vandamp_core::problem::DampingSchedule;
use vandamp_core::runner::{self, ScenarioConfig};

/// Cap on points shipped to the plot; series are strided down to this.
const MAX_PLOT_POINTS: usize = 1200;

fn decimate(series: &[f64]) -> Vec<f64> {
    if series.len() <= MAX_PLOT_POINTS {
        return series.to_vec();
    }
    let stride = series.len().div_ceil(MAX_PLOT_POINTS);
    let mut out: Vec<f64> = series.iter().step_by(stride).copied().collect();
    if let Some(&last) = series.last() {
        if out.last() != Some(&last) {
            out.push(last);
        }
    }
    out
}

pub fn simulate_json(config_text: &str) -> Result<String, String> {
    let config = ScenarioConfig::parse(config_text).map_err(|e| e.to_string())?;
    let parts = config.build().map_err(|e| e.to_string())?;
    let record = vandamp_core::diagnostics::simulate(
        &parts.integrator,
        &parts.problem,
        &parts.schedule,
        &parts.source,
        &parts.initial,
        &parts.diagnostics,
    )
    .map_err(|e| e.to_string())?;

    let nu = 2.0 * config.alpha;
    let trend = scaled_trend_series(&record.t, &record.energy, nu).map_err(|e| e.to_string())?;
    let outcome = vandamp_core::runner::scenario::evaluate(&config, &parts, record.clone())
        .map_err(|e| e.to_string())?;

    let json = serde_json::json!({
        "alpha": config.alpha,
        "nu": nu,
        "t": decimate(&record.t),
        "energy": decimate(&record.energy),
        "etilde": decimate(&record.etilde),
        "anchor": decimate(&record.anchor),
        "speed": decimate(&record.speed),
        "scaled_energy": decimate(&trend.scaled),
        "trend_ratio": trend.ratio,
        "trend_pass": trend.pass,
        "classification": outcome.classification,
        "verdicts": outcome.verdicts,
    });
    Ok(json.to_string())
}

pub fn lemma_curve_json(k: f64, alpha: f64, points: usize) -> Result<String, String> {
    let schedule = DampingSchedule::power(k, alpha, 0.0).map_err(|e| e.to_string())?;
    let base = tau0(&schedule);
    let n = points.clamp(2, 200);
    let mut taus = Vec::with_capacity(n);
    let mut lhs = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        // Log-spaced sweep over three decades beyond the threshold.
        let tau = base + 1.0e3_f64.powf(i as f64 / (n - 1) as f64) - 1.0;
        let report = lemma1_check(&schedule, tau, tau + 10.0).map_err(|e| e.to_string())?;
        taus.push(tau);
        lhs.push(report.lhs);
        rhs.push(report.rhs);
    }
    let json = serde_json::json!({
        "K": k,
        "alpha": alpha,
        "tau0": base,
        "tau": taus,
        "lhs": lhs,
        "rhs": rhs,
        "all_pass": lhs.iter().zip(&rhs).all(|(l, r)| l <= &(r * (1.0 + 1e-9))),
    });
    Ok(json.to_string())
}

pub fn classify_json(config_text: &str) -> Result<String, String> {
    let config = ScenarioConfig::parse(config_text).map_err(|e| e.to_string())?;
    let parts = config.build().map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (0..=200)
        .map(|i| parts.schedule.t0() + (config.t_end - parts.schedule.t0()) * i as f64 / 200.0)
        .collect();
    let damping = parts.schedule.check_hypotheses(&grid).map_err(|e| e.to_string())?;
    let classification = parts.source.classify(&parts.schedule);
    let json = serde_json::json!({
        "damping": damping,
        "classification": classification,
        "tau0": tau0(&parts.schedule),
        "suggested_dt": parts.integrator.dt,
    });
    Ok(json.to_string())
}

#[wasm_bindgen]
pub fn simulate(config_text: &str) -> Result<String, JsValue> {
    simulate_json(config_text).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn lemma_curve(k: f64, alpha: f64, points: usize) -> Result<String, JsValue> {
    lemma_curve_json(k, alpha, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn classify(config_text: &str) -> Result<String, JsValue> {
    classify_json(config_text).map_err(|e| JsValue::from_str(&e))
}

// Suites exist only in the CLI; re-export the cell list so the page can
// offer the pinned scenarios as presets.
#[wasm_bindgen]
pub fn preset_names() -> String {
    let cells = runner::scenario_texts(runner::SuiteName::All);
    serde_json::json!(cells.iter().map(|(name, _)| name.clone()).collect::<Vec<_>>()).to_string()
}

#[wasm_bindgen]
pub fn preset_config(name: &str) -> Result<String, JsValue> {
    runner::scenario_texts(runner::SuiteName::All)
        .into_iter()
        .find(|(cell, _)| cell == name)
        .map(|(_, text)| text)
        .ok_or_else(|| JsValue::from_str("unknown preset"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = "\
[problem]
family = quadratic
dimension = 2

[damping]
K = 2.0
alpha = 0.5

[source]
family = power_decay
c = 0.5
beta = 1.7

[integrator]
dt = 5e-3
t_end = 1e3
sample_stride = 40
";

    #[test]
    fn simulate_returns_plot_ready_json() {
        let json: serde_json::Value =
            serde_json::from_str(&simulate_json(DEMO).unwrap()).unwrap();
        let t = json["t"].as_array().unwrap();
        assert!(t.len() <= MAX_PLOT_POINTS + 1);
        assert_eq!(json["energy"].as_array().unwrap().len(), t.len());
        assert!(json["trend_pass"].as_bool().unwrap());
        assert!(json["classification"]["op_integrable"].as_bool().unwrap());
    }

    #[test]
    fn simulate_reports_config_errors() {
        let err = simulate_json("[problem]\nfamily = quadratic\n\n[damping]\nalpha = 1.0\n")
            .unwrap_err();
        assert!(err.contains("alpha must lie in [0, 1)"), "{err}");
    }

    #[test]
    fn lemma_curve_bounds_hold() {
        let json: serde_json::Value =
            serde_json::from_str(&lemma_curve_json(1.0, 0.5, 40).unwrap()).unwrap();
        assert!(json["all_pass"].as_bool().unwrap());
        assert_eq!(json["tau"].as_array().unwrap().len(), 40);
    }

    #[test]
    fn classify_matches_exponent_algebra() {
        let json: serde_json::Value =
            serde_json::from_str(&classify_json(DEMO).unwrap()).unwrap();
        assert!(json["damping"]["lower_bound"]["holds"].as_bool().unwrap());
        // nu_max = min(1.5, 2(1.7 - 1)) = 1.4
        assert!((json["classification"]["nu_max"].as_f64().unwrap() - 1.4).abs() < 1e-12);
    }

    #[test]
    fn presets_round_trip() {
        let names: Vec<String> = serde_json::from_str(&preset_names()).unwrap();
        assert!(names.iter().any(|n| n == "wave_cubic"));
        let text = preset_config("wave_cubic").map_err(|_| ()).unwrap();
        assert!(text.contains("family = wave"));
    }
}

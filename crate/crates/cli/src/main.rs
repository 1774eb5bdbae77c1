//! `vandamp`: run scenarios and verification suites for second-order
//! gradient dynamics with asymptotically vanishing damping.
//!
//! Exit codes: 0 pass (probe verdicts never gate), 1 verdict failure,
//! 2 numerical instability, 3 i/o failure.

use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vandamp_core::diagnostics::{
    big_gamma, decay_fit_series, lemma1_check, scaled_trend_series, tau0,
};
use vandamp_core::problem::DampingSchedule;
use vandamp_core::runner::{self, ScenarioConfig, SuiteName};
use vandamp_core::Error;

#[derive(Parser)]
#[command(name = "vandamp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config: writes the CSV series and prints the
    /// verdict block as JSON.
    Run {
        /// Path to a scenario config file.
        config: PathBuf,
        /// Directory for the emitted CSV (default: the config's own path
        /// setting, relative to the working directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a pinned suite: per-scenario CSVs plus summary.json.
    /// `VANDAMP_THREADS` caps concurrency.
    Suite {
        /// theorem1 | theorem2 | theorem3 | theorem4 | prop1 | lemma1 |
        /// wave | probes | all
        name: String,
        /// Output directory (default: vandamp_out/NAME).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the damping-integral bound at one (K, alpha, tau).
    Lemma1 {
        #[arg(long = "K")]
        k: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
    },
    /// Print the hypothesis report for a config: damping checks, source
    /// classification, and the admissible decay-rate bound.
    Classify {
        config: PathBuf,
    },
    /// Fit the decay rate of the energy column of an emitted CSV against a
    /// target rate nu.
    Fit {
        csv: PathBuf,
        #[arg(long)]
        nu: f64,
        /// Final fraction of the record used for the log-log fit.
        #[arg(long, default_value_t = 0.5)]
        window: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Instability { .. } => 2,
                Error::Io(_) => 3,
                _ => 1,
            }
        }
    };
    ExitCode::from(code as u8)
}

fn dispatch(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config)?;
            let name = config
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("scenario");
            let parsed = ScenarioConfig::parse_named(name, &text)?;
            if let Some(dir) = &out {
                std::fs::create_dir_all(dir)?;
            }
            let result = runner::run_scenario(&parsed, out.as_deref());
            let code = runner::exit_code(&result);
            match result {
                Ok(outcome) => {
                    println!("{}", serde_json::to_string_pretty(&outcome).unwrap());
                }
                Err(e) => eprintln!("error: {e}"),
            }
            Ok(code)
        }
        Command::Suite { name, out } => {
            let suite: SuiteName = name.parse()?;
            let dir = out.unwrap_or_else(|| PathBuf::from("vandamp_out").join(suite.to_string()));
            let report = runner::run_suite(suite, &dir, runner::threads_from_env())?;
            println!(
                "suite {}: {} scenarios{}, overall {}",
                report.suite,
                report.scenarios.len(),
                report
                    .lattice
                    .as_ref()
                    .map(|l| format!(" + {}-cell lattice", l.cells.len()))
                    .unwrap_or_default(),
                if report.overall_pass { "PASS" } else { "FAIL" }
            );
            println!("summary: {}", dir.join("summary.json").display());
            Ok(if report.overall_pass { 0 } else { 1 })
        }
        Command::Lemma1 { k, alpha, tau, t0 } => {
            let schedule = DampingSchedule::power(k, alpha, t0)?;
            let threshold = tau0(&schedule);
            let report = lemma1_check(&schedule, tau, tau + 10.0)?;
            let gamma_to_tau = big_gamma(&schedule, 0.0, tau)?;
            println!(
                "{}",
                serde_json::json!({
                    "K": k,
                    "alpha": alpha,
                    "tau": tau,
                    "tau0": threshold,
                    "Gamma(tau,0)": gamma_to_tau,
                    "lhs": report.lhs,
                    "rhs": report.rhs,
                    "pass": report.pass,
                })
            );
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Classify { config } => {
            let text = std::fs::read_to_string(&config)?;
            let parsed = ScenarioConfig::parse(&text)?;
            let parts = parsed.build()?;
            let grid: Vec<f64> = (0..=200)
                .map(|i| {
                    parts.schedule.t0()
                        + (parsed.t_end - parts.schedule.t0()) * i as f64 / 200.0
                })
                .collect();
            let damping = parts.schedule.check_hypotheses(&grid)?;
            let classification = parts.source.classify(&parts.schedule);
            println!(
                "{}",
                serde_json::json!({
                    "damping": damping,
                    "classification": classification,
                    "tau0": tau0(&parts.schedule),
                })
            );
            Ok(0)
        }
        Command::Fit { csv, nu, window } => {
            let file = std::fs::File::open(&csv)?;
            let series = runner::parse_csv(BufReader::new(file))?;
            let fit = decay_fit_series(&series.t, &series.energy, window, nu)?;
            let trend = scaled_trend_series(&series.t, &series.energy, nu)?;
            println!(
                "{}",
                serde_json::json!({
                    "nu": nu,
                    "fit": fit,
                    "trend": { "ratio": trend.ratio, "pass": trend.pass, "degenerate": trend.degenerate },
                })
            );
            Ok(0)
        }
    }
}

//! Scenario configs, suite execution, CSV emission, and verdicts — the
//! machinery behind the `vandamp` command-line interface.

pub mod config;
pub mod csv;
pub mod scenario;
pub mod suite;

pub use config::{ProblemFamily, ScenarioConfig, ScenarioParts};
pub use csv::{emit_csv, parse_csv, write_csv, CsvSeries};
pub use scenario::{
    exit_code, max_monotonicity_violation, run_scenario, NuVerdict, ScenarioOutcome,
    TheoremVerdict, VerdictBlock,
};
pub use suite::{
    lemma_lattice, run_suite, scenario_configs, scenario_texts, threads_from_env, LatticeCell,
    LatticeReport, ScenarioReport, SuiteName, SuiteReport,
};

//! Error type shared by all modules.

use crate::diagnostics::EnergyRecord;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Rejected parameters or malformed inputs.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Vector length does not match the problem dimension.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A precondition of an operation was not met.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The integrator produced a non-finite state.
    #[error("numerical instability at t = {t} (step {step})")]
    Instability {
        t: f64,
        step: usize,
        /// Diagnostics gathered before the blow-up, when available.
        partial: Option<Box<EnergyRecord>>,
    },

    /// Iterative minimization did not reach the requested tolerance.
    #[error("minimizer did not converge after {iterations} iterations (|grad| = {grad_norm:.3e})")]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        last_iterate: Vec<f64>,
    },

    /// A weighted integral classified as divergent was requested in a context
    /// that needs a finite value.
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    /// Linear solve failed to reach the required residual.
    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    /// Config parsing reports every problem found, not just the first.
    #[error("invalid config:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

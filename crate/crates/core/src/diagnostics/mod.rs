//! Everything the decay and convergence statements track along a
//! trajectory: energies, the anchor function, weighted running integrals,
//! the exponential-damping integral bound, and the detectors that turn
//! asymptotic claims into finite-horizon verdicts.

pub mod convergence;
pub mod energy;
pub mod fit;
pub mod lemma;
pub mod record;
mod tail;

pub use convergence::{
    anchor_limit_check, cauchy_check, limit_candidate_check, AnchorLimitReport, CauchyReport,
    LimitCandidate,
};
pub use energy::{anchor, energy, energy_derivative_residual, modified_energy};
pub use fit::{
    decay_fit, decay_fit_series, grad_integral_verdict, scaled_energy_trend,
    scaled_trend_series, velocity_integral_verdict, DecayFit, IntegralVerdict, Quantity,
    TrendReport, Verdict,
};
pub use lemma::{big_gamma, lemma1_check, tau0, Lemma1Report};
pub use record::{reference_solve, simulate, DiagnosticsConfig, EnergyRecord, Recorder};

//! Simulator and verification harness for the second-order evolution equation
//!
//! ```text
//! u''(t) + gamma(t) u'(t) + A u(t) + f(u(t)) = g(t),   t >= 0,
//! ```
//!
//! with asymptotically vanishing damping `gamma(t) ~ K/(1+t)^alpha`
//! (`alpha` in `[0,1)`), a convex potential `Phi(v) = a(v,v)/2 + F(v)`,
//! and an integrable source `g`.
//!
//! The crate is organised in four layers:
//!
//! * [`problem`] — damping schedules, convex problem instances (including a
//!   discretized nonlinear wave equation), source-term families, and the
//!   `H`/`V`/`V'` norm triple, each with validators for the hypotheses the
//!   decay and convergence statements require.
//! * [`dynamics`] — a fixed-step fourth-order integrator for the first-order
//!   reformulation in `(u, u')`, plus a step-refined reference solver.
//! * [`diagnostics`] — the tracked quantities (energy, modified energy,
//!   anchor function, weighted velocity integrals, the exponential-damping
//!   integral bound) and the decay/convergence detectors built on them.
//! * [`runner`] — scenario configs, suite execution, CSV emission, and the
//!   verdict machinery behind the `vandamp` command-line interface.

// `!(x > 0.0)` rejects NaN along with the out-of-range values; the
// suggested rewrite does not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod problem;
pub mod quad;
pub mod rng;
pub mod runner;

mod linalg;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

//! Problem definitions: damping schedules, convex instances, source terms,
//! and the `H`/`V`/`V'` norm triple.

pub mod convex;
pub mod damping;
pub mod nonlinearity;
pub mod norms;
pub mod operator;
pub mod source;

pub use convex::{compute_minimizer, ConvexProblem, MinimizerMode, DEFAULT_MINIMIZER_TOL};
pub use damping::{DampingKind, DampingReport, DampingSchedule, HypothesisCheck};
pub use nonlinearity::{GeneralPotential, Nonlinearity, ScalarNonlinearity};
pub use norms::{NormKind, NormTriple};
pub use operator::Operator;
pub use source::{SourceClassification, SourceFamily, SourceTerm, Tail, WeightedIntegral};

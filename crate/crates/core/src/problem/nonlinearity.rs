//! Nonlinear terms `f` deriving from a convex potential `F`.

use std::fmt;
use std::sync::Arc;

/// Componentwise scalar maps `s -> f(s)` with a known antiderivative.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarNonlinearity {
    /// `f(s) = s^3`, `F(s) = s^4/4`.
    Cubic,
    /// `f(s) = (s - shift)^3`, `F(s) = (s - shift)^4 / 4`.
    ShiftedCubic { shift: f64 },
    /// Flat basin: `F(s) = max(|s| - half_width, 0)^2`, which is C^1 and
    /// convex with `arg min = [-half_width, half_width]`.
    FlatBasin { half_width: f64 },
}

impl ScalarNonlinearity {
    pub fn f(&self, s: f64) -> f64 {
        match self {
            ScalarNonlinearity::Cubic => s * s * s,
            ScalarNonlinearity::ShiftedCubic { shift } => {
                let d = s - shift;
                d * d * d
            }
            ScalarNonlinearity::FlatBasin { half_width } => {
                let excess = s.abs() - half_width;
                if excess > 0.0 {
                    2.0 * excess * s.signum()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn antiderivative(&self, s: f64) -> f64 {
        match self {
            ScalarNonlinearity::Cubic => 0.25 * s.powi(4),
            ScalarNonlinearity::ShiftedCubic { shift } => 0.25 * (s - shift).powi(4),
            ScalarNonlinearity::FlatBasin { half_width } => {
                let excess = s.abs() - half_width;
                if excess > 0.0 {
                    excess * excess
                } else {
                    0.0
                }
            }
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            ScalarNonlinearity::Cubic => 3.0 * s * s,
            ScalarNonlinearity::ShiftedCubic { shift } => 3.0 * (s - shift) * (s - shift),
            ScalarNonlinearity::FlatBasin { half_width } => {
                if s.abs() > *half_width {
                    2.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Lipschitz bound of `f` on `|s| <= radius`.
    pub fn lipschitz(&self, radius: f64) -> f64 {
        match self {
            ScalarNonlinearity::Cubic => 3.0 * radius * radius,
            ScalarNonlinearity::ShiftedCubic { shift } => {
                let r = radius + shift.abs();
                3.0 * r * r
            }
            ScalarNonlinearity::FlatBasin { .. } => 2.0,
        }
    }

    pub fn is_odd(&self) -> bool {
        match self {
            ScalarNonlinearity::Cubic | ScalarNonlinearity::FlatBasin { .. } => true,
            ScalarNonlinearity::ShiftedCubic { shift } => *shift == 0.0,
        }
    }
}

/// General maps supply the full gradient and potential directly. The
/// potential must already include any H-weighting.
pub trait GeneralPotential: Send + Sync {
    fn potential(&self, u: &[f64]) -> f64;
    fn gradient_into(&self, u: &[f64], out: &mut [f64]);
    /// Lipschitz bound of the gradient on the max-norm ball of this radius.
    fn lipschitz(&self, radius: f64) -> f64;
    fn is_odd(&self) -> bool {
        false
    }
}

#[derive(Clone)]
pub enum Nonlinearity {
    Zero,
    /// `F(v) = h * sum_i F_scalar(v_i)`; the gradient in the H-inner product
    /// is then `f_scalar` applied componentwise.
    Componentwise(ScalarNonlinearity),
    General(Arc<dyn GeneralPotential>),
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Zero => write!(f, "Zero"),
            Nonlinearity::Componentwise(s) => write!(f, "Componentwise({s:?})"),
            Nonlinearity::General(_) => write!(f, "General(..)"),
        }
    }
}

impl Nonlinearity {
    pub fn is_zero(&self) -> bool {
        matches!(self, Nonlinearity::Zero)
    }

    pub fn potential(&self, u: &[f64], h: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Componentwise(s) => {
                h * u.iter().map(|&x| s.antiderivative(x)).sum::<f64>()
            }
            Nonlinearity::General(g) => g.potential(u),
        }
    }

    pub fn gradient_into(&self, u: &[f64], out: &mut [f64]) {
        match self {
            Nonlinearity::Zero => out.fill(0.0),
            Nonlinearity::Componentwise(s) => {
                for (o, &x) in out.iter_mut().zip(u) {
                    *o = s.f(x);
                }
            }
            Nonlinearity::General(g) => g.gradient_into(u, out),
        }
    }

    pub fn lipschitz(&self, radius: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Componentwise(s) => s.lipschitz(radius),
            Nonlinearity::General(g) => g.lipschitz(radius),
        }
    }

    pub fn is_odd(&self) -> bool {
        match self {
            Nonlinearity::Zero => true,
            Nonlinearity::Componentwise(s) => s.is_odd(),
            Nonlinearity::General(g) => g.is_odd(),
        }
    }

    /// Second derivative of the componentwise map, used by the Newton
    /// refinement in the minimizer.
    pub fn componentwise_derivative(&self, s: f64) -> Option<f64> {
        match self {
            Nonlinearity::Zero => Some(0.0),
            Nonlinearity::Componentwise(sc) => Some(sc.derivative(s)),
            Nonlinearity::General(_) => None,
        }
    }
}

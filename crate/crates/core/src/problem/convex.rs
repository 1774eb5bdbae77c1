//! Finite-dimensional convex problem instances.
//!
//! A problem bundles the operator `A`, the nonlinearity `f` (gradient of a
//! convex `F`), the H-inner-product weight, and the cached minimizer with its
//! value `Phi* = min Phi`. All provided families are realized on `R^n` with
//! `V = H = R^n` as sets; the three norms differ through `S = A + I`.

use crate::linalg;
use crate::problem::nonlinearity::{Nonlinearity, ScalarNonlinearity};
use crate::problem::operator::Operator;
use crate::rng::SplitMix64;
use crate::{Error, Result};

pub const DEFAULT_MINIMIZER_TOL: f64 = 1e-12;

/// How the minimizer is obtained at construction.
#[derive(Debug, Clone)]
pub enum MinimizerMode {
    /// Run the built-in solver from the zero initial guess.
    Compute { tol: f64 },
    /// The caller supplies a known minimizer; it is still verified.
    Known(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct ConvexProblem {
    op: Operator,
    nl: Nonlinearity,
    h: f64,
    minimizer: Vec<f64>,
    phi_star: f64,
    minimizer_tol: f64,
    /// Declared semi-coercivity constants `(lambda, mu)` in
    /// `a(v,v) + lambda |v|^2 >= mu ||v||_V^2`. With
    /// `||v||_V^2 = a(v,v) + |v|^2` this holds with equality at `(1, 1)`.
    semi_coercivity: (f64, f64),
}

impl ConvexProblem {
    pub fn new(op: Operator, nl: Nonlinearity, h: f64, mode: MinimizerMode) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid(format!("mass weight must be positive, got {h}")));
        }
        let n = op.dim();
        let (minimizer, phi_star, tol) = match mode {
            MinimizerMode::Compute { tol } => {
                let (u, phi) = compute_minimizer(&op, &nl, h, tol)?;
                (u, phi, tol)
            }
            MinimizerMode::Known(u) => {
                if u.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: u.len() });
                }
                let phi = raw_phi(&op, &nl, h, &u);
                (u, phi, DEFAULT_MINIMIZER_TOL)
            }
        };
        let problem = ConvexProblem {
            op,
            nl,
            h,
            minimizer,
            phi_star,
            minimizer_tol: tol,
            semi_coercivity: (1.0, 1.0),
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Pure quadratic `Phi(v) = <Av, v>/2` with diagonal spectrum; `u* = 0`.
    pub fn quadratic(eigs: Vec<f64>) -> Result<Self> {
        let n = eigs.len();
        Self::new(
            Operator::diagonal(eigs)?,
            Nonlinearity::Zero,
            1.0,
            MinimizerMode::Known(vec![0.0; n]),
        )
    }

    /// Diagonal quadratic plus componentwise `(s - shift)^4/4`; the minimizer
    /// is computed.
    pub fn shifted_quartic(eigs: Vec<f64>, shift: f64) -> Result<Self> {
        Self::new(
            Operator::diagonal(eigs)?,
            Nonlinearity::Componentwise(ScalarNonlinearity::ShiftedCubic { shift }),
            1.0,
            MinimizerMode::Compute { tol: DEFAULT_MINIMIZER_TOL },
        )
    }

    /// Even potential: diagonal quadratic plus componentwise `s^4/4`.
    pub fn even_quartic(eigs: Vec<f64>) -> Result<Self> {
        let n = eigs.len();
        Self::new(
            Operator::diagonal(eigs)?,
            Nonlinearity::Componentwise(ScalarNonlinearity::Cubic),
            1.0,
            MinimizerMode::Known(vec![0.0; n]),
        )
    }

    /// `A = 0` with the flat-basin potential; `arg min Phi = [-w, w]^n` has
    /// nonempty interior.
    pub fn flat_basin(n: usize, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::invalid("flat basin half-width must be positive"));
        }
        Self::new(
            Operator::zero(n),
            Nonlinearity::Componentwise(ScalarNonlinearity::FlatBasin { half_width }),
            1.0,
            MinimizerMode::Known(vec![0.0; n]),
        )
    }

    /// Discretized nonlinear wave problem on `(0, 1)` with zero Dirichlet
    /// data: `A = (1/h^2) tridiag(-1, 2, -1)`, H-weight `h = 1/(n+1)`,
    /// `F(v) = h sum_i F_scalar(v_i)`.
    ///
    /// `f_spec` must be continuous nondecreasing with `f(0) = 0`, so that the
    /// zero function is the minimizer.
    pub fn wave(n_interior: usize, f_spec: Option<ScalarNonlinearity>) -> Result<Self> {
        let op = Operator::wave_laplacian(n_interior)?;
        let h = 1.0 / (n_interior as f64 + 1.0);
        let nl = match f_spec {
            None => Nonlinearity::Zero,
            Some(s) => {
                if s.f(0.0) != 0.0 {
                    return Err(Error::invalid("wave nonlinearity must satisfy f(0) = 0"));
                }
                // Sampled monotonicity check over a generous range.
                let mut prev = f64::NEG_INFINITY;
                for i in 0..=400 {
                    let x = -10.0 + 0.05 * i as f64;
                    let y = s.f(x);
                    if y < prev - 1e-12 {
                        return Err(Error::invalid(
                            "wave nonlinearity must be nondecreasing",
                        ));
                    }
                    prev = y;
                }
                Nonlinearity::Componentwise(s)
            }
        };
        Self::new(op, nl, h, MinimizerMode::Known(vec![0.0; n_interior]))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn mass_weight(&self) -> f64 {
        self.h
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nl
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    pub fn phi_star(&self) -> f64 {
        self.phi_star
    }

    pub fn minimizer_tol(&self) -> f64 {
        self.minimizer_tol
    }

    pub fn semi_coercivity(&self) -> (f64, f64) {
        self.semi_coercivity
    }

    /// `Phi` is even exactly when `F` is even, i.e. `f` odd (the quadratic
    /// part is always even).
    pub fn is_even(&self) -> bool {
        self.nl.is_odd()
    }

    /// Whether `arg min Phi` has nonempty interior (the flat-basin family).
    pub fn argmin_has_interior(&self) -> bool {
        matches!(self.op, Operator::Zero { .. })
            && matches!(
                self.nl,
                Nonlinearity::Componentwise(ScalarNonlinearity::FlatBasin { .. })
            )
    }

    pub fn h_inner(&self, v: &[f64], w: &[f64]) -> f64 {
        self.h * linalg::dot(v, w)
    }

    pub fn h_norm(&self, v: &[f64]) -> f64 {
        self.h_inner(v, v).max(0.0).sqrt()
    }

    /// Bilinear form `a(v, w) = <Av, w>_H`.
    pub fn bilinear(&self, v: &[f64], w: &[f64]) -> f64 {
        self.h_inner(&self.op.apply(v), w)
    }

    fn check_dim(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        Ok(())
    }

    /// `Phi(u) = a(u,u)/2 + F(u)`.
    pub fn phi(&self, u: &[f64]) -> Result<f64> {
        self.check_dim(u)?;
        Ok(raw_phi(&self.op, &self.nl, self.h, u))
    }

    /// `grad Phi(u) = Au + f(u)` in the H-inner product.
    pub fn grad_phi(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(u)?;
        let mut out = vec![0.0; self.dim()];
        let mut tmp = vec![0.0; self.dim()];
        self.grad_phi_into(u, &mut out, &mut tmp);
        Ok(out)
    }

    /// Allocation-free gradient for the integrator hot loop.
    pub fn grad_phi_into(&self, u: &[f64], out: &mut [f64], tmp: &mut [f64]) {
        self.op.apply_into(u, out);
        if !self.nl.is_zero() {
            self.nl.gradient_into(u, tmp);
            for (o, t) in out.iter_mut().zip(tmp.iter()) {
                *o += *t;
            }
        }
    }

    /// Construction-time hypothesis checks on seeded random vectors.
    fn validate(&self) -> Result<()> {
        let n = self.dim();
        let mut rng = SplitMix64::new(0x5eed_c0de);
        let lambda_scale = self.op.lambda_max_exact().unwrap_or(1.0).max(1.0);

        for _ in 0..20 {
            let v = rng.vector(n);
            let w = rng.vector(n);
            let avw = self.h_inner(&self.op.apply(&v), &w);
            let vaw = self.h_inner(&v, &self.op.apply(&w));
            let scale = lambda_scale * self.h * (n as f64);
            if (avw - vaw).abs() > 1e-10 * scale {
                return Err(Error::invalid("operator fails the symmetry check"));
            }
            let avv = self.h_inner(&self.op.apply(&v), &v);
            if avv < -1e-10 * scale {
                return Err(Error::invalid("operator fails the positivity check"));
            }
        }

        // Midpoint convexity of F near the minimizer.
        for _ in 0..50 {
            let x: Vec<f64> = self
                .minimizer
                .iter()
                .map(|&m| m + 2.0 * rng.next_symmetric())
                .collect();
            let y: Vec<f64> = self
                .minimizer
                .iter()
                .map(|&m| m + 2.0 * rng.next_symmetric())
                .collect();
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            let fx = self.nl.potential(&x, self.h);
            let fy = self.nl.potential(&y, self.h);
            let fm = self.nl.potential(&mid, self.h);
            if fm > 0.5 * (fx + fy) + 1e-10 * (1.0 + fx.abs() + fy.abs()) {
                return Err(Error::invalid("nonlinearity fails midpoint convexity"));
            }
        }

        // Stationarity of the cached minimizer.
        let grad_norm = self.h_norm(&self.grad_phi(&self.minimizer)?);
        if grad_norm > self.minimizer_tol.max(1e-12) * 10.0 {
            return Err(Error::invalid(format!(
                "cached minimizer has |grad Phi| = {grad_norm:.3e}, above tolerance"
            )));
        }

        // Semi-coercivity with the declared constants.
        let (lam, mu) = self.semi_coercivity;
        for _ in 0..20 {
            let v = rng.vector(n);
            let a = self.bilinear(&v, &v);
            let h2 = self.h_inner(&v, &v);
            let v_norm2 = a + h2;
            if a + lam * h2 < mu * v_norm2 * (1.0 - 1e-12) - 1e-12 {
                return Err(Error::invalid("semi-coercivity check failed"));
            }
        }
        Ok(())
    }
}

fn raw_phi(op: &Operator, nl: &Nonlinearity, h: f64, u: &[f64]) -> f64 {
    let au = op.apply(u);
    0.5 * h * linalg::dot(&au, u) + nl.potential(u, h)
}

fn raw_grad(op: &Operator, nl: &Nonlinearity, u: &[f64]) -> Vec<f64> {
    let mut g = op.apply(u);
    if !nl.is_zero() {
        let mut tmp = vec![0.0; u.len()];
        nl.gradient_into(u, &mut tmp);
        for (o, t) in g.iter_mut().zip(&tmp) {
            *o += *t;
        }
    }
    g
}

/// Minimize `Phi` to `||grad Phi||_H <= tol` from the zero initial guess.
///
/// Gradient descent with backtracking, refined by damped Newton when the
/// nonlinearity is componentwise (the Newton matrix `A + diag f'(u)` is then
/// available in closed form).
pub fn compute_minimizer(
    op: &Operator,
    nl: &Nonlinearity,
    h: f64,
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let n = op.dim();
    let mut u = vec![0.0; n];
    let grad_norm = |g: &[f64]| (h * linalg::dot(g, g)).sqrt();

    let mut phi_u = raw_phi(op, nl, h, &u);
    let mut g = raw_grad(op, nl, &u);

    // Gradient descent phase.
    let lip0 = op.lambda_max_exact().unwrap_or(1.0).max(1.0) + nl.lipschitz(4.0);
    let mut step = 1.0 / lip0;
    let max_gd = 50_000;
    let mut it = 0;
    while grad_norm(&g) > tol && it < max_gd {
        let g2 = linalg::dot(&g, &g) * h;
        let mut t = step;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate: Vec<f64> = u.iter().zip(&g).map(|(x, gi)| x - t * gi).collect();
            let phi_c = raw_phi(op, nl, h, &candidate);
            if phi_c <= phi_u - 0.5 * t * g2 {
                u = candidate;
                phi_u = phi_c;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (t * 2.0).min(1.0 / lip0 * 1e6);
        g = raw_grad(op, nl, &u);
        it += 1;

        // Switch to Newton once in the basin.
        if nl.componentwise_derivative(0.0).is_some() && it >= 5 {
            break;
        }
    }

    // Damped Newton refinement for componentwise nonlinearities.
    if nl.componentwise_derivative(0.0).is_some() {
        for _ in 0..200 {
            if grad_norm(&g) <= tol {
                break;
            }
            let fprime: Vec<f64> = u
                .iter()
                .map(|&x| nl.componentwise_derivative(x).unwrap())
                .collect();
            let delta = match newton_solve(op, &fprime, &g) {
                Some(d) => d,
                None => break,
            };
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let candidate: Vec<f64> =
                    u.iter().zip(&delta).map(|(x, d)| x - t * d).collect();
                let phi_c = raw_phi(op, nl, h, &candidate);
                if phi_c <= phi_u + 1e-14 * (1.0 + phi_u.abs()) {
                    u = candidate;
                    phi_u = phi_c;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
            g = raw_grad(op, nl, &u);
        }
    }

    let gn = grad_norm(&g);
    if gn > tol {
        return Err(Error::NonConvergence { iterations: it, grad_norm: gn, last_iterate: u });
    }
    let phi = raw_phi(op, nl, h, &u);
    Ok((u, phi))
}

/// Solve `(A + diag(fprime)) delta = g` for the Newton step.
fn newton_solve(op: &Operator, fprime: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let n = g.len();
    match op {
        Operator::Zero { .. } => {
            let mut d = vec![0.0; n];
            for i in 0..n {
                if fprime[i] <= 1e-300 {
                    if g[i].abs() > 0.0 {
                        return None;
                    }
                } else {
                    d[i] = g[i] / fprime[i];
                }
            }
            Some(d)
        }
        Operator::Diagonal { eigs } => {
            let mut d = vec![0.0; n];
            for i in 0..n {
                let denom = eigs[i] + fprime[i];
                if denom <= 1e-300 {
                    return None;
                }
                d[i] = g[i] / denom;
            }
            Some(d)
        }
        Operator::WaveLaplacian { n_interior } => {
            let m = *n_interior;
            let hh = 1.0 / (m as f64 + 1.0);
            let inv_h2 = 1.0 / (hh * hh);
            let diag: Vec<f64> = (0..m).map(|i| 2.0 * inv_h2 + fprime[i]).collect();
            let off = vec![-inv_h2; m.saturating_sub(1)];
            Some(crate::linalg::thomas_solve(&diag, &off, g))
        }
        Operator::Dense(_) => {
            // Assemble and factor; dimensions here are small.
            let mut m = nalgebra::DMatrix::zeros(n, n);
            let mut basis = vec![0.0; n];
            for j in 0..n {
                basis.fill(0.0);
                basis[j] = 1.0;
                let col = op.apply(&basis);
                for i in 0..n {
                    m[(i, j)] = col[i];
                }
                m[(j, j)] += fprime[j];
            }
            let chol = nalgebra::Cholesky::new(m)?;
            let sol = chol.solve(&nalgebra::DVector::from_column_slice(g));
            Some(sol.iter().copied().collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_scalar_quadratic() {
        let p = ConvexProblem::quadratic(vec![1.0]).unwrap();
        assert!((p.phi(&[2.0]).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(p.phi(&[0.0]).unwrap(), p.phi_star());
    }

    #[test]
    fn phi_cubic_nonlinearity() {
        let p = ConvexProblem::even_quartic(vec![1.0]).unwrap();
        assert!((p.phi(&[1.0]).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn grad_examples() {
        let p = ConvexProblem::even_quartic(vec![1.0]).unwrap();
        let g = p.grad_phi(&[2.0]).unwrap();
        assert!((g[0] - 10.0).abs() < 1e-12);
        let at_min = p.grad_phi(p.minimizer()).unwrap();
        assert!(p.h_norm(&at_min) <= p.minimizer_tol());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let p = ConvexProblem::quadratic(vec![1.0, 2.0]).unwrap();
        assert!(matches!(p.phi(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(p.grad_phi(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn minimizer_identity_quadratic() {
        let (u, phi) = compute_minimizer(
            &Operator::identity(6),
            &Nonlinearity::Zero,
            1.0,
            1e-12,
        )
        .unwrap();
        assert!(linalg::max_abs(&u) < 1e-12);
        assert!(phi.abs() < 1e-24);
    }

    #[test]
    fn minimizer_odd_cubic_is_zero() {
        let (u, phi) = compute_minimizer(
            &Operator::identity(1),
            &Nonlinearity::Componentwise(ScalarNonlinearity::Cubic),
            1.0,
            1e-12,
        )
        .unwrap();
        assert!(u[0].abs() < 1e-12);
        assert!(phi.abs() < 1e-24);
    }

    #[test]
    fn minimizer_shifted_quartic_bisection_oracle() {
        // grad Phi(u) = u + (u-2)^3; bisection locates the root
        // independently of the Newton path.
        let p = ConvexProblem::shifted_quartic(vec![1.0], 2.0).unwrap();
        let grad = |s: f64| s + (s - 2.0).powi(3);
        let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
        assert!(grad(lo) < 0.0 && grad(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if grad(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!(root > 0.9 && root < 1.1, "root at {root}");
        assert!((p.minimizer()[0] - root).abs() < 1e-10);
        assert!((p.phi_star() - (0.5 * root * root + 0.25 * (root - 2.0).powi(4))).abs() < 1e-12);
    }

    #[test]
    fn wave_problem_shape() {
        let p = ConvexProblem::wave(2, None).unwrap();
        assert!((p.mass_weight() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.minimizer(), &[0.0, 0.0]);
        assert_eq!(p.phi_star(), 0.0);
    }

    #[test]
    fn wave_cubic_minimizer_zero() {
        let p = ConvexProblem::wave(64, Some(ScalarNonlinearity::Cubic)).unwrap();
        assert_eq!(p.phi_star(), 0.0);
        assert!(p.is_even());
    }

    #[test]
    fn wave_rejects_decreasing_nonlinearity() {
        // A shifted cubic has f(0) != 0, violating the Dirichlet
        // compatibility requirement.
        let bad = ConvexProblem::wave(8, Some(ScalarNonlinearity::ShiftedCubic { shift: 1.0 }));
        assert!(bad.is_err());
    }

    #[test]
    fn flat_basin_has_interior() {
        let p = ConvexProblem::flat_basin(3, 1.0).unwrap();
        assert!(p.argmin_has_interior());
        assert!(p.is_even());
        assert_eq!(p.phi_star(), 0.0);
        // Inside the basin the gradient vanishes identically.
        let g = p.grad_phi(&[0.5, -0.9, 0.0]).unwrap();
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let problems = vec![
            ConvexProblem::quadratic(vec![1.0, 3.0, 0.5]).unwrap(),
            ConvexProblem::even_quartic(vec![2.0, 1.0]).unwrap(),
            ConvexProblem::shifted_quartic(vec![1.0, 2.0], 1.5).unwrap(),
            ConvexProblem::wave(8, Some(ScalarNonlinearity::Cubic)).unwrap(),
            ConvexProblem::flat_basin(3, 1.0).unwrap(),
        ];
        let eps = 1e-5;
        let mut rng = SplitMix64::new(99);
        for p in &problems {
            let n = p.dim();
            for _ in 0..100 {
                let u: Vec<f64> = (0..n).map(|_| 3.0 * rng.next_symmetric()).collect();
                let g = p.grad_phi(&u).unwrap();
                let g_norm = p.h_norm(&g);
                for i in 0..n {
                    let mut up = u.clone();
                    let mut um = u.clone();
                    up[i] += eps;
                    um[i] -= eps;
                    // Finite difference of Phi picks up the H-weight.
                    let fd = (p.phi(&up).unwrap() - p.phi(&um).unwrap())
                        / (2.0 * eps * p.mass_weight());
                    let denom = g_norm.max(1.0);
                    assert!(
                        (fd - g[i]).abs() / denom < 1e-6,
                        "fd {fd} vs grad {} at component {i}",
                        g[i]
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_monotonicity() {
        let problems = vec![
            ConvexProblem::even_quartic(vec![1.0, 0.0]).unwrap(),
            ConvexProblem::flat_basin(2, 1.0).unwrap(),
            ConvexProblem::wave(6, Some(ScalarNonlinearity::Cubic)).unwrap(),
        ];
        let mut rng = SplitMix64::new(3);
        for p in &problems {
            let n = p.dim();
            for _ in 0..100 {
                let x: Vec<f64> = (0..n).map(|_| 4.0 * rng.next_symmetric()).collect();
                let y: Vec<f64> = (0..n).map(|_| 4.0 * rng.next_symmetric()).collect();
                let gx = p.grad_phi(&x).unwrap();
                let gy = p.grad_phi(&y).unwrap();
                let diff_g = linalg::sub(&gx, &gy);
                let diff_x = linalg::sub(&x, &y);
                assert!(p.h_inner(&diff_g, &diff_x) >= -1e-12);
            }
        }
    }

    #[test]
    fn convexity_inequality_at_minimizer() {
        let problems = vec![
            ConvexProblem::even_quartic(vec![1.0, 2.0]).unwrap(),
            ConvexProblem::shifted_quartic(vec![1.0], 2.0).unwrap(),
        ];
        let mut rng = SplitMix64::new(11);
        for p in &problems {
            let n = p.dim();
            let ubar = p.minimizer().to_vec();
            for _ in 0..100 {
                let u: Vec<f64> = (0..n).map(|_| 3.0 * rng.next_symmetric()).collect();
                let g = p.grad_phi(&u).unwrap();
                let diff = linalg::sub(&ubar, &u);
                let lhs = p.phi(&ubar).unwrap();
                let rhs = p.phi(&u).unwrap() + p.h_inner(&g, &diff);
                assert!(lhs >= rhs - 1e-10, "convexity violated: {lhs} < {rhs}");
            }
        }
    }

    #[test]
    fn degenerate_zero_operator_allowed() {
        let p = ConvexProblem::new(
            Operator::zero(2),
            Nonlinearity::Componentwise(ScalarNonlinearity::Cubic),
            1.0,
            MinimizerMode::Compute { tol: 1e-12 },
        )
        .unwrap();
        assert!(linalg::max_abs(p.minimizer()) < 1e-3);
    }
}

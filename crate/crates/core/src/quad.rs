//! Adaptive quadrature helpers.
//!
//! Integrands here are smooth and mostly monotone (exponentials of damping
//! integrals, powers of `1+t`), so adaptive Simpson with Richardson
//! extrapolation is accurate and cheap. Oscillatory source families are
//! handled separately by splitting at the sign changes of the modulation.

/// Adaptive Simpson on `[a, b]` with a relative tolerance.
///
/// Long intervals are pre-split on a geometric ladder so the error scale of
/// each panel reflects the local integrand, not a wild first estimate of a
/// decaying tail. `abs_floor` stops refinement once panel contributions are
/// negligible in absolute terms.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_floor: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let width = b - a;
    let mut total = 0.0;
    let mut lo = a;
    let mut step = (1.0 + lo.abs()).min(width);
    loop {
        let hi = (lo + step).min(b);
        total += adaptive_panel(f, lo, hi, rel_tol, abs_floor);
        if hi >= b {
            return total;
        }
        lo = hi;
        step *= 8.0;
    }
}

fn adaptive_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_floor: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let scale = whole.abs().max(abs_floor);
    recurse(f, a, b, fa, fm, fb, whole, rel_tol * scale, 52)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integral of `f` over `[a, b]` where `f` changes sign only at the provided
/// interior breakpoints; each panel is integrated adaptively.
pub fn piecewise_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: impl Iterator<Item = f64>,
    rel_tol: f64,
    abs_floor: f64,
) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    for bp in breakpoints {
        if bp <= lo {
            continue;
        }
        if bp >= b {
            break;
        }
        total += adaptive_simpson(f, lo, bp, rel_tol, abs_floor);
        lo = bp;
    }
    total + adaptive_simpson(f, lo, b, rel_tol, abs_floor)
}

/// Upper bound on `int_T^inf (1+t)^r e^{-a t} dt` via integration by parts,
/// tight once `a (1+T) > r`.
pub fn exp_power_tail_bound(r: f64, a: f64, t_start: f64) -> f64 {
    let base = (1.0 + t_start).powf(r) * (-a * t_start).exp() / a;
    if r <= 0.0 {
        base
    } else {
        let ratio = r / (a * (1.0 + t_start));
        if ratio < 1.0 {
            base / (1.0 - ratio)
        } else {
            // Callers place T beyond the integrand's peak; this branch only
            // pads a bound that is already loose.
            base * 2.0
        }
    }
}

/// Sum of an alternating series accelerated by iterated averaging
/// (van Wijngaarden transformation). `terms` holds the signed terms.
pub fn accelerate_alternating(terms: &[f64]) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    let mut partial: Vec<f64> = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for &t in terms {
        acc += t;
        partial.push(acc);
    }
    while partial.len() > 1 {
        for i in 0..partial.len() - 1 {
            partial[i] = 0.5 * (partial[i] + partial[i + 1]);
        }
        partial.pop();
    }
    partial[0]
}

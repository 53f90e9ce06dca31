//! Adaptive Simpson quadrature for the few places a closed form is not
//! available: the ∫ϑ/t integral of custom families and the tail-kernel
//! Fourier coefficients.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;
const DEFAULT_MIN_DEPTH: u32 = 5;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_forced(f, a, b, tol, DEFAULT_MIN_DEPTH)
}

/// Integrate with at least `min_depth` levels of forced subdivision.
///
/// Symmetric integrands alias the Simpson sample points (cos(2πmx) on
/// dyadic panels evaluates to a constant), so callers integrating
/// oscillatory functions must force enough initial splitting to resolve
/// the oscillation.
pub fn integrate_forced<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    min_depth: u32,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Domain(format!("bad integration range [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adapt(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, min_depth)
}

/// Integrate over consecutive panels `[pts[0], pts[1]], ...`, splitting the
/// tolerance evenly. Useful when the integrand has known kinks.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, pts: &[f64], tol: f64) -> Result<f64> {
    integrate_pieces_forced(f, pts, tol, DEFAULT_MIN_DEPTH)
}

pub fn integrate_pieces_forced<F: Fn(f64) -> f64>(
    f: &F,
    pts: &[f64],
    tol: f64,
    min_depth: u32,
) -> Result<f64> {
    if pts.len() < 2 {
        return Err(Error::Domain("need at least two breakpoints".into()));
    }
    let per = tol / (pts.len() - 1) as f64;
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += integrate_forced(f, w[0], w[1], per, min_depth)?;
    }
    Ok(total)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    min_depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // second disjunct: the discrepancy is at the rounding floor of the
    // panel values, so further splitting cannot help
    let converged = delta.abs() <= 15.0 * tol
        || delta.abs() <= 4.0 * f64::EPSILON * (left.abs() + right.abs())
        || (b - a) < 1e-15;
    if min_depth == 0 && converged {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Convergence(format!(
            "quadrature failed to converge on [{a}, {b}] (residual {delta:e})"
        )));
    }
    let next_min = min_depth.saturating_sub(1);
    let l = adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, next_min)?;
    let r = adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, next_min)?;
    Ok(l + r)
}

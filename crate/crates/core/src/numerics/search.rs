//! One-dimensional search: golden-section maximization and bisection.

use crate::error::{Error, Result};
use crate::Real;

pub const DEFAULT_BISECT_TOL: f64 = 1e-10;
/// Golden-section tolerance relative to the search horizon.
pub const DEFAULT_GOLDEN_REL_TOL: f64 = 1e-9;

const MAX_BISECT_ITER: usize = 400;

/// Maximizes a unimodal `f` on `[lo, hi]`, returning `(argmax, max)`.
///
/// The bracket shrinks until its width is at most `tol`; the best of the
/// final bracket ends and midpoint is returned, so a maximum at a boundary
/// yields that boundary. Non-finite evaluations rank below every finite one.
pub fn golden_section_max<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, tol: T) -> (T, T) {
    assert!(lo < hi, "golden_section_max requires lo < hi");
    let eval = |x: T| {
        let v = f(x);
        if v.is_nan() {
            T::neg_infinity()
        } else {
            v
        }
    };
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let tol = tol.max(T::epsilon() * (lo.abs() + hi.abs()));

    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    let mid = (a + b) / T::lit(2.0);
    [(mid, eval(mid)), (a, eval(a)), (b, eval(b))]
        .into_iter()
        .fold((mid, T::neg_infinity()), |best, cand| {
            if cand.1 > best.1 {
                cand
            } else {
                best
            }
        })
}

/// Root of a monotone `g` on `[lo, hi]`.
///
/// Returns once `|g(x)| <= tol` or the bracket is narrower than `tol`.
pub fn bisect_root<T: Real, G: Fn(T) -> T>(g: G, lo: T, hi: T, tol: T) -> Result<T> {
    bisect(g, lo, hi, tol, tol)
}

/// Bisection with separate residual and bracket-width tolerances. A width
/// tolerance of zero runs until the bracket stops shrinking in floating point.
pub(crate) fn bisect<T: Real, G: Fn(T) -> T>(
    g: G,
    lo: T,
    hi: T,
    residual_tol: T,
    width_tol: T,
) -> Result<T> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (ga, gb) = (g(a), g(b));
    if ga.is_nan() || gb.is_nan() {
        return Err(Error::InvalidInput(
            "bisection endpoint evaluates to NaN".into(),
        ));
    }
    if ga == T::zero() {
        return Ok(a);
    }
    if gb == T::zero() {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(Error::Bracket {
            g_lo: ga.as_f64(),
            g_hi: gb.as_f64(),
        });
    }
    let increasing = gb > T::zero();
    let mut mid = (a + b) / T::lit(2.0);
    for _ in 0..MAX_BISECT_ITER {
        mid = a + (b - a) / T::lit(2.0);
        let gm = g(mid);
        if gm.abs() <= residual_tol || b - a <= width_tol || mid <= a || mid >= b {
            return Ok(mid);
        }
        if (gm > T::zero()) == increasing {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(mid)
}

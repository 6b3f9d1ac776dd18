//! Principal branch of the real Lambert W function.
//!
//! `W0(x)` is the solution `w >= -1` of `w * exp(w) = x` for `x >= -1/e`.
//! Iteration is Halley's method; the start point comes from the branch-point
//! series near `-1/e`, `ln(1 + x)` in the middle range, and the asymptotic
//! expansion `ln x - ln ln x` for large `x`. Above `e` the equation is solved
//! in log form, `w + ln w = ln x`, so `exp(w)` never overflows.

use crate::error::{Error, Result};
use crate::Real;

const MAX_ITER: usize = 64;

/// Principal branch `W0(x)`.
///
/// Arguments below `-1/e` by more than a few ulps are a domain error; inputs
/// within that slack are treated as the branch point and return `-1`.
pub fn lambert_w0<T: Real>(x: T) -> Result<T> {
    if x.is_nan() {
        return Err(Error::Domain {
            function: "lambert_w0",
            value: f64::NAN,
        });
    }
    if x.is_infinite() && x > T::zero() {
        return Ok(T::infinity());
    }
    let branch = -T::one() / T::E();
    let slack = T::lit(8.0) * T::epsilon();
    if x < branch - slack {
        return Err(Error::Domain {
            function: "lambert_w0",
            value: x.as_f64(),
        });
    }
    if x <= branch {
        return Ok(-T::one());
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x > T::E() {
        Ok(large_argument(x))
    } else {
        Ok(halley(x, initial_guess(x)))
    }
}

fn initial_guess<T: Real>(x: T) -> T {
    if x < T::lit(-0.25) {
        // Series in p = sqrt(2 (e x + 1)) about the branch point.
        let p = (T::lit(2.0) * (T::E() * x + T::one()))
            .max(T::zero())
            .sqrt();
        -T::one() + p - p * p / T::lit(3.0) + T::lit(11.0 / 72.0) * p * p * p
    } else {
        x.ln_1p()
    }
}

fn halley<T: Real>(x: T, mut w: T) -> T {
    let two = T::lit(2.0);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + T::one();
        if wp1 == T::zero() || f == T::zero() {
            break;
        }
        let denom = ew * wp1 - (w + two) * f / (two * wp1);
        let step = f / denom;
        let next = (w - step).max(-T::one());
        if (next - w).abs() <= T::lit(4.0) * T::epsilon() * (T::one() + next.abs()) {
            w = next;
            break;
        }
        w = next;
    }
    w
}

/// Solves `w + ln w - ln x = 0` for `x > e`, where `w > 1`.
fn large_argument<T: Real>(x: T) -> T {
    let lx = x.ln();
    let llx = lx.ln();
    let mut w = lx - llx + llx / lx;
    for _ in 0..MAX_ITER {
        let f = w + w.ln() - lx;
        let d1 = T::one() + T::one() / w;
        let d2 = -T::one() / (w * w);
        let step = f / (d1 - f * d2 / (T::lit(2.0) * d1));
        let next = w - step;
        if (next - w).abs() <= T::lit(4.0) * T::epsilon() * next.abs() {
            w = next;
            break;
        }
        w = next;
    }
    // Polish in the original form when exp(w) is representable; this removes
    // the rounding of ln x from the residual.
    if w < T::max_value().ln() - T::lit(1.0) {
        w = halley(x, w);
    }
    w
}

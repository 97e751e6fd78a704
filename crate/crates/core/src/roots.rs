//! Bracketed bisection. Every one-dimensional solve in the crate goes
//! through here; the objective functions have long flat stretches where
//! derivative-based steps stall.

use crate::error::{Error, Result};

const MAX_ITER: usize = 400;

/// Bisects `f` on `[lo, hi]` until the bracket is machine-adjacent.
///
/// `f(lo)` and `f(hi)` must have strictly opposite signs (a zero at either end
/// is returned immediately). The endpoint with the smaller residual is returned.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Root(format!("objective is NaN at bracket [{lo}, {hi}]")));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Root(format!(
            "no sign change on [{lo}, {hi}]: f = ({f_lo:e}, {f_hi:e})"
        )));
    }
    for _ in 0..MAX_ITER {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.is_nan() {
            return Err(Error::Root(format!("objective is NaN at {mid}")));
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    Ok(if f_lo.abs() <= f_hi.abs() { lo } else { hi })
}

/// Bisection on an open interval whose endpoints are never evaluated (for
/// example poles). `lo_positive` gives the sign of `f` just inside `lo`.
pub fn bisect_open<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, lo_positive: bool) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut best = (f64::INFINITY, f64::NAN);
    for _ in 0..MAX_ITER {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.is_nan() {
            return Err(Error::Root(format!("objective is NaN at {mid}")));
        }
        if fm.abs() < best.0 {
            best = (fm.abs(), mid);
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best.1.is_nan() {
        return Err(Error::Root(format!("empty open interval ({lo}, {hi})")));
    }
    Ok(best.1)
}

/// Pushes `hi` outward from `start` (doubling the step) until `f(hi)` has the
/// sign `want`, without exceeding `cap`. Returns the first such point.
pub fn expand_until<F: Fn(f64) -> f64>(f: F, start: f64, first_step: f64, cap: f64, want_positive: bool) -> Result<f64> {
    let mut step = first_step;
    let mut x = start + step;
    loop {
        let x_eval = x.min(cap);
        let v = f(x_eval);
        if (v > 0.0) == want_positive && v != 0.0 {
            return Ok(x_eval);
        }
        if x_eval >= cap {
            return Err(Error::Root(format!(
                "bracket expansion from {start} reached the cap {cap} without a sign change"
            )));
        }
        step *= 2.0;
        x = start + step;
    }
}

/// Counts sign changes of `f` on a uniform grid over `[lo, hi]`.
pub fn count_sign_changes<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> usize {
    let mut changes = 0;
    let mut prev = f(lo);
    for k in 1..=n {
        let x = lo + (hi - lo) * k as f64 / n as f64;
        let v = f(x);
        if v != 0.0 && prev != 0.0 && v.signum() != prev.signum() {
            changes += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    changes
}

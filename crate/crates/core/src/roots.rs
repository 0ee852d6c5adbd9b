use crate::error::{Error, Result};
use crate::scalar::Real;

pub(crate) const MAX_BISECTIONS: usize = 200;

/// Bisection for a root of `f` on `[lo, hi]`.
///
/// Requires a sign change (or an exact zero) at the endpoints; returns the
/// midpoint once the bracket is narrower than `tol`.
pub(crate) fn bisect<T: Real>(mut f: impl FnMut(T) -> T, lo: T, hi: T, tol: T) -> Result<T> {
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let half = T::lit(0.5);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + half * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + half * (hi - lo))
}

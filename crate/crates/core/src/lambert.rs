//! Principal branch of the Lambert W function and the inversion of
//! `w ln w - w = gamma` that produces every stationary point in the allocator.

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_ITERATIONS: usize = 100;

/// Value of `W0(x)` together with convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertResult<T = f64> {
    pub w: T,
    pub iterations: usize,
    /// `|w e^w - x|` at the returned value.
    pub residual: T,
}

/// Evaluates the principal branch `W0(x)` for `x >= -1/e`.
///
/// Inputs up to `Real::BRANCH_CLAMP` below `-1/e` are treated as the branch
/// point itself. The initial guess depends on the region (branch-point series,
/// small-argument polynomial, logarithmic forms) and is polished with Halley
/// iteration.
pub fn lambert_w0<T: Real>(x: T) -> Result<LambertResult<T>> {
    let inv_e = T::one() / T::E();
    let branch = -inv_e;
    if x.is_nan() || x.is_infinite() || x < branch - T::BRANCH_CLAMP {
        return Err(Error::Domain { x: x.as_f64() });
    }
    if x <= branch {
        return Ok(LambertResult {
            w: -T::one(),
            iterations: 0,
            residual: T::zero(),
        });
    }
    if x == T::zero() {
        return Ok(LambertResult {
            w: T::zero(),
            iterations: 0,
            residual: T::zero(),
        });
    }

    let mut w = initial_guess(x);
    let mut iterations = 0;
    let two = T::lit(2.0);
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let ew = w.exp();
        let f = w * ew - x;
        if f == T::zero() {
            break;
        }
        let wp1 = w + T::one();
        let denom = ew * wp1 - (w + two) * f / (two * wp1);
        if denom == T::zero() || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        // Halley may overshoot past the branch point from a poor guess.
        if w < -T::one() {
            w = -T::one();
        }
        if step.abs() < T::STEP_TOL * (T::one() + w.abs()) {
            break;
        }
    }

    Ok(LambertResult {
        w,
        iterations,
        residual: (w * w.exp() - x).abs(),
    })
}

fn initial_guess<T: Real>(x: T) -> T {
    let e = T::E();
    let quarter = T::lit(0.25);
    if x < -quarter {
        // Series in p = sqrt(2 (e x + 1)) about the branch point.
        let p = (T::lit(2.0) * (e * x + T::one())).max(T::zero()).sqrt();
        let p2 = p * p;
        -T::one() + p - p2 / T::lit(3.0) + T::lit(11.0 / 72.0) * p2 * p
            - T::lit(43.0 / 540.0) * p2 * p2
    } else if x <= quarter {
        x * (T::one() - x)
    } else if x <= e {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// Solves `w ln w - w = gamma` for `w >= 1`, i.e. `w = exp(W0(gamma / e) + 1)`.
///
/// Fails with [`Error::ConstraintForcedActive`] when `gamma < -1`: no
/// stationary point exists there.
pub fn solve_omega<T: Real>(gamma: T) -> Result<T> {
    if gamma.is_nan() {
        return Err(Error::Domain { x: f64::NAN });
    }
    let x = gamma / T::E();
    match lambert_w0(x) {
        Ok(r) => Ok((r.w + T::one()).exp()),
        Err(Error::Domain { .. }) if gamma < -T::one() => Err(Error::ConstraintForcedActive {
            gamma: gamma.as_f64(),
        }),
        Err(e) => Err(e),
    }
}

//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point type the allocator can run on: `f32` or `f64`.
///
/// The associated constants are the numerical tolerances used throughout the
/// crate. They are tuned per precision so that the same algorithms run in
/// `f32` with proportionally looser guarantees.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Width of the window below `-1/e` that is clamped onto the branch point.
    const BRANCH_CLAMP: Self;
    /// Relative Halley step size at which Lambert W iteration stops.
    const STEP_TOL: Self;
    /// Smallest net energy consumption accepted as a valid efficiency denominator.
    const DENOM_GUARD: Self;
    /// Gains closer than this are treated as equal.
    const TIE_TOL: Self;
    /// Relative slack granted when comparing harvested energy with a demand.
    const HARVEST_SLACK: Self;

    /// Converts an `f64` literal.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal representable in every Real type")
    }

    /// Lossy conversion for error reporting and formatting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty, $clamp:expr, $step:expr, $denom:expr, $tie:expr, $slack:expr) => {
        impl Real for $t {
            const BRANCH_CLAMP: Self = $clamp;
            const STEP_TOL: Self = $step;
            const DENOM_GUARD: Self = $denom;
            const TIE_TOL: Self = $tie;
            const HARVEST_SLACK: Self = $slack;
        }
    };
}

impl_real!(f64, 1e-15, 1e-15, 1e-12, 1e-12, 1e-12);
impl_real!(f32, 1e-6, 5e-7, 1e-5, 1e-6, 1e-5);

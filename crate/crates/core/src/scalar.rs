//! Scalar abstraction shared by the simulator, the noise and mitigation
//! layers, and the trainer.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numerical core is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances that only make sense for a
/// given precision come from [`Real::roundoff`].
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Magnitude below which negative probabilities are treated as round-off.
    fn roundoff() -> Self;

    /// Lossy conversion from `f64`. Values outside the target range saturate.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 converts to every Real")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize converts to every Real")
    }
}

impl Real for f64 {
    #[inline]
    fn roundoff() -> Self {
        1e-12
    }
}

impl Real for f32 {
    #[inline]
    fn roundoff() -> Self {
        1e-5
    }
}

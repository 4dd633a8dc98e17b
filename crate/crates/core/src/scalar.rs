//! Scalar abstraction shared by every numeric module.

use std::fmt;

use nalgebra::RealField;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the model and the solvers are generic over.
///
/// Implemented for `f32` and `f64`. The acceptance tolerances of the SDP
/// solver and the beamformer oracle assume `f64`.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + FloatConst
    + Default
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn infinity() -> Self {
        Self::lit(f64::INFINITY)
    }

    /// Machine epsilon of the scalar type.
    #[inline]
    fn eps() -> Self {
        Self::default_epsilon()
    }
}

impl<T> Real for T where
    T: RealField
        + Copy
        + FromPrimitive
        + ToPrimitive
        + FloatConst
        + Default
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}

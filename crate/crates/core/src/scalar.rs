//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the geometry, solver and cost model are generic over.
///
/// Tolerances are exposed per type so that `f32` runs get a looser tie
/// threshold than `f64` runs.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Absolute threshold (time units) below which two heights are a tie.
    fn tie_tol() -> Self;

    /// Converts a literal. Panics only if the literal is not representable,
    /// which cannot happen for the finite values used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize not representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn tie_tol() -> f64 {
        1e-12
    }
}

impl Real for f32 {
    #[inline]
    fn tie_tol() -> f32 {
        1e-5
    }
}

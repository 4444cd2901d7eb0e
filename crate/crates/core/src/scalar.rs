//! Scalar abstraction shared by the geometry, the maps and the dynamics.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the maps are evaluated in: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a literal. Every finite `f64` is representable (possibly rounded).
    #[inline(always)]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline(always)]
    fn from_i(x: i64) -> Self {
        Self::from_i64(x).expect("integer literal")
    }

    #[inline(always)]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

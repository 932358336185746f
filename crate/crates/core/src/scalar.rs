//! Scalar abstraction so the numeric core works with either `f32` or `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used throughout the library: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Copy + Send + Sync + 'static
{
    /// Lossless widening to `f64` (exact for both supported types).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar widens to f64")
    }

    /// Conversion from `f64`, rounding to the nearest representable value.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 narrows to scalar")
    }

    /// Exact conversion from a small unsigned integer.
    fn from_count(v: u32) -> Self {
        Self::from_u32(v).expect("u32 converts to scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

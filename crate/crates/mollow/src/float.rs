//! Generic real scalar used throughout the numeric kernels.
//!
//! Everything that is pure math (Bloch dynamics, closed forms, filters,
//! fitting) is written against [`Real`] so the same code runs in `f32` or
//! `f64`. Concrete aliases for the common `f64` instantiation live at the
//! crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy cast from an `f64` literal or intermediate.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any Real")
    }

    /// Lossless widening into `f64` (used at FFT and RNG boundaries).
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("Real widens to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// 2π as the working scalar.
#[inline]
pub fn tau<T: Real>() -> T {
    T::PI() + T::PI()
}

//! Scalar abstraction so the whole pipeline runs at either float width.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumCast};

/// Speed of light in m/s (exact SI value).
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Boltzmann constant in J/K (exact SI value).
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;

/// Floating-point scalar used throughout the library.
///
/// Blanket-implemented for `f32` and `f64`. Concrete aliases for the main
/// types live at the crate root.
pub trait Real: Float + FloatConst + Sum<Self> + Debug + Display + Send + Sync + 'static {
    /// Convert an `f64` constant into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("constant representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        <f64 as NumCast>::from(self).expect("scalar convertible to f64")
    }

    /// 10^(x/10): decibels to linear power ratio.
    #[inline]
    fn db_to_linear(db: Self) -> Self {
        Self::of(10.0).powf(db / Self::of(10.0))
    }

    /// 10·log10(x): linear power ratio to decibels.
    #[inline]
    fn linear_to_db(lin: Self) -> Self {
        Self::of(10.0) * lin.log10()
    }

    #[inline]
    fn speed_of_light() -> Self {
        Self::of(SPEED_OF_LIGHT_M_S)
    }
}

impl<T> Real for T where T: Float + FloatConst + Sum<Self> + Debug + Display + Send + Sync + 'static {}

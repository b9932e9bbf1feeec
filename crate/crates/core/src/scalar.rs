//! Floating point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the walks are generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + rustfft::FftNum + Default + Display + Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts an index or count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + rustfft::FftNum + Default + Display + Debug + Send + Sync + 'static
{
}

/// Complex number over a [`Real`] scalar.
pub type Complex<T> = num_complex::Complex<T>;

//! Scalar abstraction shared by every numeric module.

use nalgebra as na;
use num_complex::Complex;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point type the numeric kernels are generic over (`f32`, `f64`).
pub trait Real: na::RealField + Copy + Default + FloatConst + FromPrimitive + ToPrimitive {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    #[inline]
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `exp(j * angle)`.
#[inline]
pub fn phasor<T: Real>(angle: T) -> Complex<T> {
    Complex::new(angle.cos(), angle.sin())
}

/// Real value lifted to the complex plane.
#[inline]
pub fn cplx<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

pub(crate) fn two_pi<T: Real>() -> T {
    <T as FloatConst>::PI() + <T as FloatConst>::PI()
}

//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating point type the library is generic over (`f32` or `f64`).
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
    /// Converts an `f64` literal. Every `Real` can represent (an approximation of)
    /// any finite `f64`, so this never fails for finite input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal is representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("real scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex amplitude over a [`Real`] scalar.
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

/// Multiplies by `i^k`.
#[inline]
pub(crate) fn mul_i_pow<T: Real>(z: Cplx<T>, k: u32) -> Cplx<T> {
    match k & 3 {
        0 => z,
        1 => cplx(-z.im, z.re),
        2 => cplx(-z.re, -z.im),
        _ => cplx(z.im, -z.re),
    }
}

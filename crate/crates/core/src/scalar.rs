//! Floating-point scalar abstraction.
//!
//! Everything downstream of the exact big-rational layer is generic over the
//! working precision. `f64` is the default used by the CLI; `f32` exists
//! mostly to make precision-loss experiments cheap.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num::complex::Complex;
use num::traits::{Float, FloatConst, NumAssign, NumCast};

pub trait Scalar:
    Float + FloatConst + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 -> scalar conversion")
    }

    fn as_f64(self) -> f64 {
        <f64 as NumCast>::from(self).expect("scalar -> f64 conversion")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over a working-precision scalar.
pub type C<F> = Complex<F>;

/// Default working precision.
pub type Real = f64;
/// Default complex type.
pub type CReal = Complex<f64>;

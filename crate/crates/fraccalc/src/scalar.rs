//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the engine is generic over. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
    + rustfft::FftNum
    + Serialize
    + DeserializeOwned
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Converts a count or index.
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the engine scalar.
pub type C<T> = Complex<T>;

pub(crate) fn cx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

pub(crate) fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

pub(crate) fn i_unit<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

pub(crate) fn finite<T: Real>(z: C<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `|a - b| / max(|b|, floor)`.
pub fn rel_err<T: Real>(a: C<T>, b: C<T>, floor: T) -> T {
    (a - b).norm() / b.norm().max(floor)
}

/// Returns `exp(i t)`.
pub(crate) fn cis<T: Real>(t: T) -> C<T> {
    Complex::new(t.cos(), t.sin())
}

/// Exact integer test on a real value.
pub(crate) fn as_integer<T: Real>(x: T) -> Option<i64> {
    if x.is_finite() && x == x.round() && x.abs() < T::lit(9.0e15) {
        x.to_i64()
    } else {
        None
    }
}

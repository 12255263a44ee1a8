//! Scalar abstraction: the whole engine is generic over the floating-point
//! type through [`Scalar`]; `f64` is the default used by the concrete
//! aliases at the crate root.

use nalgebra::RealField;
use num_traits::FromPrimitive;

/// Floating-point scalar usable for covariance-matrix calculus.
pub trait Scalar: RealField + FromPrimitive + Copy {}

impl<T> Scalar for T where T: RealField + FromPrimitive + Copy {}

/// Lift an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn cst<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in scalar type")
}

/// Base-2 logarithm.
#[inline]
pub(crate) fn log2<T: Scalar>(x: T) -> T {
    x.ln() / T::ln_2()
}

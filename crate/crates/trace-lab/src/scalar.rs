//! Scalar abstraction for the norm and duality computations.

use std::fmt;
use std::iter::Sum;

use num_traits::Float;

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Float + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static {}

impl<T> Real for T where T: Float + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static {}

/// Conversion of an `f64` constant into the working scalar type.
pub(crate) fn r<R: Real>(v: f64) -> R {
    R::from(v).expect("constant representable in scalar type")
}

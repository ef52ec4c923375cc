//! Scalar abstraction shared by the model, solver and transition code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the mean-field machinery is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// `max(value, factor * eps)`: keeps tolerances meaningful for `f32`.
#[inline]
pub(crate) fn tol_floor<T: Real>(value: f64, eps_factor: f64) -> T {
    let v = lit::<T>(value);
    let floor = T::epsilon() * lit(eps_factor);
    if v > floor {
        v
    } else {
        floor
    }
}

//! Scalar abstraction so the whole core is generic over the float width.

use core::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar used throughout the simulation core.
///
/// Bundles the operations the dynamics and controller need (arithmetic,
/// trigonometry, finiteness checks) with conversion from `f64` constants, so
/// every algorithm is written once and instantiated at `f32` or `f64`. The
/// crate root exports `f64` aliases of all public types for the common case.
pub trait Scalar: Float + FromPrimitive + Debug + Display + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Display + 'static {}

/// Converts an `f64` constant into the active scalar type.
///
/// Panics only if `T` cannot represent ordinary finite constants, which no
/// real float type triggers.
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 constant must convert into the scalar type")
}

//! Floating-point abstraction the numerical core is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Scalar type used by every engine in this crate. Implemented for `f32` and
/// `f64`; the crate root exposes `f64` aliases for the common case.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    ///
    /// Panics if the value is not representable, which cannot happen for the
    /// fixed literals this crate feeds it.
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("literal not representable in scalar type")
    }

    /// Tolerance for unit-norm and orthogonality validation, scaled so that
    /// `f32` inputs built from `f32` arithmetic still validate.
    #[inline]
    fn geometry_tol() -> Self {
        Self::of(1e-12).max(Self::epsilon() * Self::of(100.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

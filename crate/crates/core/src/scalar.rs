//! Floating-point scalar abstraction used by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the toolkit computes with: `f32` or `f64`.
///
/// All core math is generic over this trait; the crate root exposes `f64`
/// aliases for the common double-precision instantiation.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossless-enough conversion from `f64` literals and tolerances.
    fn from_f64_lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Conversion from a count; exact for any length this crate handles.
    fn from_usize_lit(v: usize) -> Self {
        Self::from_usize(v).expect("usize representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

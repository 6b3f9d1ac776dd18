//! Floating point abstraction shared by every solver.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the solvers are generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    /// Converts a count or index.
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_round_trip() {
        assert_eq!(<f64 as Real>::lit(0.25), 0.25);
        assert_eq!(<f32 as Real>::lit(0.25), 0.25f32);
        assert_eq!(<f32 as Real>::count(7).as_f64(), 7.0);
    }
}

//! Scalar abstraction: every geometric kernel in this crate is generic over
//! a floating point type.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: f32 or f64.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Absolute tolerance used by the geometric comparisons (unit scale).
    /// 1e-9 in double precision, scaled up for coarser scalars.
    fn geom_tol() -> Self {
        let floor = Self::from_f64(1e-9).unwrap();
        let eps_based = Self::epsilon() * Self::from_f64(32.0).unwrap();
        if eps_based > floor {
            eps_based
        } else {
            floor
        }
    }

    /// Shorthand for lossy conversion from f64 literals.
    fn c(v: f64) -> Self {
        Self::from_f64(v).unwrap()
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

//! Floating point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Real scalar the model and solvers are generic over: `f32` or `f64`.
///
/// Besides the usual float arithmetic, each type carries the tolerances the
/// fixed-point enumeration uses. They are tuned to the mantissa width, so a
/// boundary point computed in `f32` is accepted as readily as one in `f64`.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Slack allowed when testing a regime's clipping inequalities.
    fn consistency_tol() -> Self;

    /// Below this magnitude the interior participation system is singular.
    fn singular_tol() -> Self;

    /// Componentwise distance under which two fixed points are the same point.
    fn distinct_tol() -> Self;

    /// Converts a literal. Every literal used in the crate is representable.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    /// Clamps into `[0, 1]`.
    #[inline]
    fn clip01(self) -> Self {
        self.max(Self::zero()).min(Self::one())
    }
}

impl Scalar for f64 {
    fn consistency_tol() -> Self {
        1e-11
    }
    fn singular_tol() -> Self {
        1e-12
    }
    fn distinct_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn consistency_tol() -> Self {
        2e-5
    }
    fn singular_tol() -> Self {
        1e-6
    }
    fn distinct_tol() -> Self {
        1e-4
    }
}

//! Scalar abstractions.
//!
//! [`Field`] is the minimal exact-arithmetic contract (`+ − × ÷`, ordering) and is
//! satisfied by `f32`, `f64` and the rational types from `num-rational`. The
//! potential algebra and the transportation LP only need a `Field`, so they run
//! exactly over rationals. [`Real`] adds the floating point operations the
//! geometry, quadrature and solvers need.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::{BigRational, Ratio};
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Ordered field scalar.
pub trait Field:
    Clone + PartialOrd + Num + Signed + Debug + Send + Sync + 'static
{
    /// `1/2` in this field.
    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }
}

impl<T> Field for T where T: Clone + PartialOrd + Num + Signed + Debug + Send + Sync + 'static {}

/// Floating point scalar used by the geometric and numerical code.
pub trait Real: Field + Copy + Float + FromPrimitive + ToPrimitive + Display + Default + Sum {
    /// Converts an `f64` literal. Panics only if the literal is not representable,
    /// which cannot happen for `f32`/`f64`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }
}

impl<T> Real for T where
    T: Field + Copy + Float + FromPrimitive + ToPrimitive + Display + Default + Sum
{
}

/// Scalars accepted by the exact transportation solver.
///
/// Floating point types pivot with a small relative tolerance; rational types pivot
/// exactly.
pub trait LpScalar: Field {
    /// Reduced-cost threshold below which a cell is considered improving, given the
    /// largest absolute cost in the problem.
    fn pivot_tolerance(max_abs_cost: &Self) -> Self;

    /// Largest accepted mismatch between total supply and total demand.
    fn balance_tolerance(total: &Self) -> Self;

    /// Nearest `f64`, used only for heuristics that do not affect exactness.
    fn approx(&self) -> f64;
}

impl LpScalar for f64 {
    fn pivot_tolerance(max_abs_cost: &Self) -> Self {
        1e-13 * max_abs_cost.max(1.0)
    }

    fn balance_tolerance(total: &Self) -> Self {
        1e-9 * total.abs()
    }

    fn approx(&self) -> f64 {
        *self
    }
}

impl LpScalar for f32 {
    fn pivot_tolerance(max_abs_cost: &Self) -> Self {
        1e-6 * max_abs_cost.max(1.0)
    }

    fn balance_tolerance(total: &Self) -> Self {
        1e-5 * total.abs()
    }

    fn approx(&self) -> f64 {
        f64::from(*self)
    }
}

macro_rules! exact_lp_scalar {
    ($($t:ty),*) => {$(
        impl LpScalar for Ratio<$t> {
            fn pivot_tolerance(_: &Self) -> Self {
                num_traits::Zero::zero()
            }

            fn balance_tolerance(_: &Self) -> Self {
                num_traits::Zero::zero()
            }

            fn approx(&self) -> f64 {
                self.to_f64().unwrap_or(0.0)
            }
        }
    )*};
}

exact_lp_scalar!(i32, i64, i128);

impl LpScalar for BigRational {
    fn pivot_tolerance(_: &Self) -> Self {
        num_traits::Zero::zero()
    }

    fn balance_tolerance(_: &Self) -> Self {
        num_traits::Zero::zero()
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(0.0)
    }
}

pub(crate) fn inf_norm<S: Real>(values: &[S]) -> S {
    values.iter().fold(S::zero(), |acc, v| acc.max(v.abs()))
}

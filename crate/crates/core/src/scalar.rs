//! Numeric abstraction shared by validation and metrics so that hand-built schedules can
//! be checked in exact rational arithmetic and solver output in `f64`.

use std::fmt::Debug;

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num, ToPrimitive};

pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// Convert an `f64` model quantity (rate, volume) into this type.
    ///
    /// # Panics
    /// For rational types, if `x` has no close `i64/i64` representation.
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// The tolerance used for comparisons: `tol` itself for floats, zero for exact types.
    fn tolerance(tol: f64) -> Self;

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            Self::zero() - self.clone()
        } else {
            self.clone()
        }
    }

    fn max_val(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance(tol: f64) -> Self {
        tol
    }
}

impl Scalar for Rational64 {
    fn from_f64(x: f64) -> Self {
        <Rational64 as FromPrimitive>::from_f64(x)
            .unwrap_or_else(|| panic!("{x} has no i64 rational form"))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance(_tol: f64) -> Self {
        Rational64::from_integer(0)
    }
}

//! Scalar traits shared by the dense linear algebra.
//!
//! Integer matrices (isometries, Gram matrices) only need ring operations.
//! Elimination, kernels and inertia need a field; the exact field is
//! [`Rational`](crate::Rational) and the floating point fields are `f64` and
//! `f32`, where "zero" means "below the type's elimination tolerance".

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Ring scalar: anything a matrix can be multiplied over.
pub trait Scalar: Clone + Debug + PartialEq + Num + Signed {
    fn from_i64(v: i64) -> Self;
}

impl Scalar for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
}

impl Scalar for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for f32 {
    fn from_i64(v: i64) -> Self {
        v as f32
    }
}

/// Field scalar used by elimination.
pub trait Field: Scalar + PartialOrd {
    /// `true` for exact types; elimination on inexact types pivots on the
    /// largest entry and treats anything below [`Field::tolerance`] as zero.
    const EXACT: bool;

    fn tolerance() -> f64;

    fn to_f64(&self) -> f64;

    fn from_f64(v: f64) -> Self;

    fn is_negligible(&self) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.to_f64().abs() <= Self::tolerance()
        }
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
}

impl Field for BigRational {
    const EXACT: bool = true;

    fn tolerance() -> f64 {
        0.0
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(v).unwrap_or_else(BigRational::zero)
    }
}

impl Field for f64 {
    const EXACT: bool = false;

    fn tolerance() -> f64 {
        1e-9
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(v: f64) -> Self {
        v
    }
}

impl Field for f32 {
    const EXACT: bool = false;

    fn tolerance() -> f64 {
        1e-4
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

//! Number types used by the exact analysis: `f64` and exact rationals.

use std::fmt::Debug;

use num::bigint::BigInt;
use num::traits::{Num, ToPrimitive};
use num::BigRational;

pub trait Scalar: Num + Clone + Debug + PartialOrd + Send + Sync {
    fn from_u64(v: u64) -> Self;

    /// `num / den`; exact for rationals.
    fn from_ratio(num: u128, den: u128) -> Self;

    /// Exact binary value of a finite float for rationals.
    fn from_f64(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// `e^self`, when the type can represent it.
    fn exp(&self) -> Option<Self>;

    const EXACT: bool;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_u64(v: u64) -> Self {
        v as f64
    }

    fn from_ratio(num: u128, den: u128) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn exp(&self) -> Option<Self> {
        Some(f64::exp(*self))
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: u128, den: u128) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite value")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn exp(&self) -> Option<Self> {
        None
    }
}

use std::fmt::Debug;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::Rational;

/// Arithmetic needed by the simplex kernel.
pub(crate) trait Scalar: Clone + PartialOrd + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_f64(v: f64) -> Self;
    /// Values this small are dropped from the tableau.
    fn negligible(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    /// Storage size in bits (0 for fixed-size types).
    fn bits(&self) -> u64;
}

const DROP: f64 = 1e-11;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn negligible(&self) -> bool {
        f64::abs(*self) <= DROP
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn bits(&self) -> u64 {
        0
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_f64(v: f64) -> Self {
        Rational::from_float(v).unwrap_or_default()
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn bits(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }
}

//! Coefficient scalars.
//!
//! Every exact structure in the crate (cyclotomic numbers, q-series,
//! polynomials) is generic over a [`Scalar`]: the ring the power-basis
//! coordinates live in. `BigInt` gives the ring of integers O_N,
//! `BigRational` gives the field K_N. Machine types (`i64`, `Rational64`,
//! `f64`) are supported for small experiments and tests.

use std::fmt::Debug;
use std::ops::{AddAssign, Neg, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// A commutative ring of coordinates.
pub trait Scalar:
    Num
    + Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Neg<Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + 'static
{
    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn mul_i64(&self, k: i64) -> Self;
    /// Exact division by a nonzero integer, `None` when the quotient leaves the ring.
    fn div_i64_exact(&self, k: i64) -> Option<Self>;
    /// True when the value is a rational integer.
    fn is_integral(&self) -> bool;
    fn to_f64(&self) -> f64;
}

/// Scalars in which every nonzero element is invertible.
pub trait FieldScalar: Scalar {
    fn recip(&self) -> Self;
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self;
}

/// Exact rational scalars that can be rebuilt from numerator/denominator strings.
pub trait ExactScalar: Scalar {
    fn numer_denom(&self) -> (BigInt, BigInt);
    fn from_numer_denom(num: BigInt, den: BigInt) -> Option<Self>;
}

impl Scalar for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn from_bigint(v: &BigInt) -> Self {
        v.clone()
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn mul_i64(&self, k: i64) -> Self {
        self * k
    }
    fn div_i64_exact(&self, k: i64) -> Option<Self> {
        let (q, r) = self.div_rem(&BigInt::from(k));
        r.is_zero().then_some(q)
    }
    fn is_integral(&self) -> bool {
        true
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl ExactScalar for BigInt {
    fn numer_denom(&self) -> (BigInt, BigInt) {
        (self.clone(), BigInt::one())
    }
    fn from_numer_denom(num: BigInt, den: BigInt) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        let (q, r) = num.div_rem(&den);
        r.is_zero().then_some(q)
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn mul_i64(&self, k: i64) -> Self {
        self * BigRational::from_integer(BigInt::from(k))
    }
    fn div_i64_exact(&self, k: i64) -> Option<Self> {
        (k != 0).then(|| self / BigRational::from_integer(BigInt::from(k)))
    }
    fn is_integral(&self) -> bool {
        self.is_integer()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl FieldScalar for BigRational {
    fn recip(&self) -> Self {
        num_traits::Inv::inv(self)
    }
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }
}

impl ExactScalar for BigRational {
    fn numer_denom(&self) -> (BigInt, BigInt) {
        (self.numer().clone(), self.denom().clone())
    }
    fn from_numer_denom(num: BigInt, den: BigInt) -> Option<Self> {
        (!den.is_zero()).then(|| BigRational::new(num, den))
    }
}

impl Scalar for i64 {
    fn from_i64(v: i64) -> Self {
        v
    }
    fn from_bigint(v: &BigInt) -> Self {
        v.to_i64().expect("integer does not fit in i64")
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn mul_i64(&self, k: i64) -> Self {
        self * k
    }
    fn div_i64_exact(&self, k: i64) -> Option<Self> {
        (k != 0 && self % k == 0).then(|| self / k)
    }
    fn is_integral(&self) -> bool {
        true
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for Rational64 {
    fn from_i64(v: i64) -> Self {
        Rational64::from_integer(v)
    }
    fn from_bigint(v: &BigInt) -> Self {
        Rational64::from_integer(v.to_i64().expect("integer does not fit in i64"))
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn mul_i64(&self, k: i64) -> Self {
        self * Rational64::from_integer(k)
    }
    fn div_i64_exact(&self, k: i64) -> Option<Self> {
        (k != 0).then(|| self / Rational64::from_integer(k))
    }
    fn is_integral(&self) -> bool {
        self.is_integer()
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl FieldScalar for Rational64 {
    fn recip(&self) -> Self {
        num_traits::Inv::inv(*self)
    }
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        Rational64::new(
            num.to_i64().expect("numerator does not fit in i64"),
            den.to_i64().expect("denominator does not fit in i64"),
        )
    }
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_bigint(v: &BigInt) -> Self {
        ToPrimitive::to_f64(v).unwrap_or(f64::NAN)
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn mul_i64(&self, k: i64) -> Self {
        self * k as f64
    }
    fn div_i64_exact(&self, k: i64) -> Option<Self> {
        (k != 0).then(|| self / k as f64)
    }
    fn is_integral(&self) -> bool {
        self.fract() == 0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl FieldScalar for f64 {
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        Scalar::to_f64(num) / Scalar::to_f64(den)
    }
}

/// Converts an exact rational to an integer, if it is one.
pub fn rational_to_integer(v: &BigRational) -> Option<BigInt> {
    v.is_integer().then(|| v.to_integer())
}

/// Absolute value helper used in reports.
pub fn abs_f64<T: Scalar>(v: &T) -> f64 {
    v.to_f64().abs()
}

#[allow(dead_code)]
fn _assert_signed<T: Signed>() {}

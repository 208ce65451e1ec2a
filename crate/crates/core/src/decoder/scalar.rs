use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Number type a machine computes in. A machine uses one backend throughout.
pub trait Scalar: Clone + fmt::Debug + PartialEq + PartialOrd + Send + Sync + 'static {
    /// Tag written to JSON.
    const BACKEND: &'static str;
    /// Comparisons are exact regardless of the tie rule.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact for the rational backend (every finite float is a dyadic rational).
    fn from_f64(x: f64) -> Result<Self>;
    fn to_f64(&self) -> f64;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// `acc += a · b`
    fn mul_add_to(acc: &mut Self, a: &Self, b: &Self);
    fn is_zero(&self) -> bool;

    fn relu(&self) -> Self {
        if *self > Self::zero() {
            self.clone()
        } else {
            Self::zero()
        }
    }

    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl Scalar for f64 {
    const BACKEND: &'static str = "float";
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(x: f64) -> Result<Self> {
        Ok(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn mul_add_to(acc: &mut Self, a: &Self, b: &Self) {
        *acc += a * b;
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self).map_or(Value::Null, Value::Number)
    }
    fn from_json(v: &Value) -> Result<Self> {
        v.as_f64()
            .ok_or_else(|| Error::Parse(format!("expected a finite number, found {v}")))
    }
}

impl Scalar for BigRational {
    const BACKEND: &'static str = "rational";
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x).ok_or_else(|| Error::invalid(format!("{x} has no rational value")))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn mul_add_to(acc: &mut Self, a: &Self, b: &Self) {
        if !Zero::is_zero(a) && !Zero::is_zero(b) {
            *acc += a * b;
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_json(&self) -> Value {
        if self.denom().is_one() {
            Value::String(self.numer().to_string())
        } else {
            Value::String(format!("{}/{}", self.numer(), self.denom()))
        }
    }
    fn from_json(v: &Value) -> Result<Self> {
        let text = v
            .as_str()
            .ok_or_else(|| Error::Parse(format!("expected a rational string \"p/q\", found {v}")))?;
        let bad = || Error::Parse(format!("bad rational {text:?}"));
        let (p, q) = match text.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (text.trim(), "1"),
        };
        let p: BigInt = p.parse().map_err(|_| bad())?;
        let q: BigInt = q.parse().map_err(|_| bad())?;
        if Zero::is_zero(&q) {
            return Err(bad());
        }
        Ok(BigRational::new(p, q))
    }
}

/// How near-equal scores are treated by the float backend.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TieRule {
    pub tolerance: f64,
    /// Compare floats exactly, ignoring the tolerance.
    pub exact: bool,
}

impl Default for TieRule {
    fn default() -> Self {
        TieRule {
            tolerance: 1e-9,
            exact: false,
        }
    }
}

impl TieRule {
    /// `x` counts as equal to the maximum `max`.
    pub fn tied<S: Scalar>(&self, x: &S, max: &S) -> bool {
        if S::EXACT || self.exact {
            x == max
        } else {
            max.to_f64() - x.to_f64() <= self.tolerance
        }
    }

    /// `x` and `y` are within tolerance of each other but not equal.
    pub fn near_miss<S: Scalar>(&self, x: &S, y: &S) -> bool {
        if S::EXACT || self.exact {
            false
        } else {
            x != y && (x.to_f64() - y.to_f64()).abs() <= self.tolerance
        }
    }
}

/// Index of the leftmost entry tied with the maximum.
pub fn leftmost_max<S: Scalar>(xs: &[S], rule: TieRule) -> Option<usize> {
    let mut max = xs.first()?;
    for x in xs {
        if x > max {
            max = x;
        }
    }
    xs.iter().position(|x| rule.tied(x, max))
}

//! Scalar arithmetic for measures and Gram matrices.
//!
//! Two scalar modes exist: exact rationals ([`Rational`], arbitrary precision,
//! always in lowest terms with positive denominator) and binary floats (`f64`).
//! All verification paths run on rationals; floats are used by the numerical
//! witness search and by empirical estimation. The mode is a type parameter,
//! so mixing the two in one computation does not compile.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::Error;

/// Arbitrary precision rational, kept in lowest terms by construction.
pub type Rational = num_rational::BigRational;

/// Relative tolerance used for zero tests in float mode.
pub const FLOAT_REL_TOL: f64 = 1e-10;

/// Numeric field the measure and kernel code is generic over.
pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialOrd + num_traits::Num + Signed + Send + Sync + 'static
{
    /// `true` for exact arithmetic.
    const EXACT: bool;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn to_f64(&self) -> f64;

    /// Zero test under the mode's tolerance. Exact for rationals; for floats
    /// `|self| <= FLOAT_REL_TOL * max(|scale|, 1)`.
    fn is_negligible(&self, scale: &Self) -> bool;

    fn to_json(&self) -> Value;

    fn from_json(value: &Value) -> Result<Self, Error>;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Rational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_negligible(&self, _scale: &Self) -> bool {
        self.is_zero()
    }

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(value: &Value) -> Result<Self, Error> {
        match value {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Rational::from_integer(BigInt::from(i)))
                } else {
                    Err(Error::Parse(format!("rational expected as \"p/q\" string or integer, found {n}")))
                }
            }
            other => Err(Error::Parse(format!("expected a rational, found {other}"))),
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_negligible(&self, scale: &Self) -> bool {
        self.abs() <= FLOAT_REL_TOL * scale.abs().max(1.0)
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self).map(Value::Number).unwrap_or(Value::Null)
    }

    fn from_json(value: &Value) -> Result<Self, Error> {
        match value {
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse(format!("not a float: {n}"))),
            Value::String(s) => parse_rational(s).map(|r| Scalar::to_f64(&r)),
            other => Err(Error::Parse(format!("expected a number, found {other}"))),
        }
    }
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let text = text.trim();
    let bad = || Error::Parse(format!("malformed rational {text:?}"));
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {text:?}")));
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(text.parse().map_err(|_| bad())?)),
    }
}

/// Shorthand for building rationals in code and tests.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::from_ratio(numer, denom)
}

/// Exact rational value of a finite float.
pub fn exact_from_f64(x: f64) -> Option<Rational> {
    Rational::from_f64(x)
}

/// Closest rational to `x` with denominator at most `max_denom`, found from the
/// continued fraction expansion of the exact value of `x` (convergents plus the
/// best semiconvergent).
pub fn limit_denominator(x: f64, max_denom: u64) -> Option<Rational> {
    let exact = exact_from_f64(x)?;
    let max_denom = BigInt::from(max_denom.max(1));
    if exact.denom() <= &max_denom {
        return Some(exact);
    }

    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let (mut n, mut d) = (exact.numer().clone(), exact.denom().clone());
    loop {
        let (a, r) = n.div_mod_floor(&d);
        let q2 = &q0 + &a * &q1;
        if q2 > max_denom {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        n = std::mem::replace(&mut d, r);
        if d.is_zero() {
            break;
        }
    }
    let k = (&max_denom - &q0) / &q1;
    let semi = Rational::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let conv = Rational::new(p1, q1);
    if (&semi - &exact).abs() <= (&conv - &exact).abs() {
        Some(semi)
    } else {
        Some(conv)
    }
}

//! Exact scalars: big rationals, factorials and zero-convention binomials.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational number, always kept in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("factorial of negative integer {0}")]
    NegativeFactorial(i64),
    #[error("cannot parse rational {0:?}")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

/// `n!` for `n >= 0`.
pub fn factorial(n: i64) -> Result<BigInt, ArithError> {
    if n < 0 {
        return Err(ArithError::NegativeFactorial(n));
    }
    Ok((2..=n).fold(BigInt::one(), |acc, k| acc * k))
}

/// Binomial coefficient with every out-of-range pattern (`b < 0`, `b > a`,
/// `a < 0`) mapped to zero.
pub fn binomial(a: i64, b: i64) -> BigInt {
    if a < 0 || b < 0 || b > a {
        return BigInt::zero();
    }
    let b = b.min(a - b);
    // C(a, k) = C(a, k-1) * (a - k + 1) / k stays integral at every step.
    let mut acc = BigInt::one();
    for k in 1..=b {
        acc = acc * (a - k + 1) / k;
    }
    acc
}

/// Row `[C(n, 0), C(n, 1), ..., C(n, n)]`; empty for negative `n`.
pub fn binomial_row(n: i64) -> Vec<BigInt> {
    if n < 0 {
        return Vec::new();
    }
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut acc = BigInt::one();
    row.push(acc.clone());
    for k in 1..=n {
        acc = acc * (n - k + 1) / k;
        row.push(acc.clone());
    }
    row
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

/// Parses `"p/q"` or `"p"` (surrounding whitespace ignored).
pub fn parse_rational(s: &str) -> Result<Rational, ArithError> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| ArithError::Parse(s.to_string()))?;
    let den = BigInt::from_str(den).map_err(|_| ArithError::Parse(s.to_string()))?;
    if den.is_zero() {
        return Err(ArithError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// True when `x` is an integer strictly greater than zero.
pub fn is_positive_integer(x: &Rational) -> bool {
    x.is_integer() && x.is_positive()
}

/// Serde adapter writing a [`Rational`] as its exact `"p/q"` string.
pub mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

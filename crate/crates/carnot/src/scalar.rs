//! Exact rational scalars and their text form.
//!
//! Every symbolic quantity in this crate is a `num_rational::BigRational`.
//! The canonical text form is `num/den` in lowest terms with a positive
//! denominator; a plain integer prints without the `/1` tail. Parsing accepts
//! integers, `num/den` fractions, and decimal literals (converted exactly).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in rational literal `{0}`")]
    ZeroDenominator(String),
}

/// Shorthand for an integer rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `num/den`. Panics on a zero denominator; intended for
/// literals in code and tests.
pub fn rat(num: i64, den: i64) -> Rational {
    assert!(den != 0, "zero denominator");
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Canonical text form: `3`, `-3`, `1/2`, `-5/7`.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses an integer, a `num/den` fraction, or a decimal such as `0.25`.
pub fn parse_rational(text: &str) -> Result<Rational, ScalarError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ScalarError::Malformed(text.to_string()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| ScalarError::Malformed(text.to_string()))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| ScalarError::Malformed(text.to_string()))?;
        if d.is_zero() {
            return Err(ScalarError::ZeroDenominator(text.to_string()));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let digits = frac_part.trim();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ScalarError::Malformed(text.to_string()));
        }
        let negative = int_part.trim_start().starts_with('-');
        let whole: BigInt = match int_part.trim() {
            "" | "-" => BigInt::zero(),
            t => t.parse().map_err(|_| ScalarError::Malformed(text.to_string()))?,
        };
        let scale = BigInt::from(10u32).pow(digits.len() as u32);
        let frac: BigInt = digits.parse().map_err(|_| ScalarError::Malformed(text.to_string()))?;
        let frac = if negative { -frac } else { frac };
        return Ok(Rational::new(whole * &scale + frac, scale));
    }
    let n: BigInt = s.parse().map_err(|_| ScalarError::Malformed(text.to_string()))?;
    Ok(Rational::from_integer(n))
}

/// Lossy conversion for the numeric harness.
pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float into a rational.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// `x^n` for a nonnegative integer exponent.
pub fn pow_u32(x: &Rational, n: u32) -> Rational {
    let mut acc = Rational::one();
    let mut base = x.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Exact square root if the rational is a perfect square.
pub fn exact_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let num = x.numer().sqrt();
    let den = x.denom().sqrt();
    if &(&num * &num) == x.numer() && &(&den * &den) == x.denom() {
        Some(Rational::new(num, den))
    } else {
        None
    }
}

//! Numeric backends shared by the chain, absorbing, stationary and jump modules.
//!
//! Two backends implement [`Scalar`]: arbitrary-precision rationals
//! ([`Rational`]), where every comparison and row-sum check is exact, and
//! `f64`, where checks use [`Scalar::tolerance`].

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number.
pub type Rational = BigRational;

/// Which arithmetic a matrix is stored in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "rational" => Ok(Backend::Exact),
            "float" | "f64" => Ok(Backend::Float),
            other => Err(Error::Parse(format!("unknown backend '{other}'"))),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Signed
    + Send
    + Sync
    + 'static
{
    const BACKEND: Backend;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Converts a float. The exact backend reads the shortest decimal
    /// representation, so `0.1` becomes `1/10`.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    fn from_rational(r: &Rational) -> Self;

    /// Zero for the exact backend.
    fn tolerance() -> Self;

    /// Larger is a better elimination pivot.
    fn pivot_weight(&self) -> f64;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    fn is_exact() -> bool {
        Self::BACKEND == Backend::Exact
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(r: &Rational) -> Self {
        ratio_to_f64(r)
    }

    fn tolerance() -> Self {
        1e-12
    }

    fn pivot_weight(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Option<Self> {
        if !x.is_finite() {
            return None;
        }
        parse_decimal(&format!("{x}")).ok()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn tolerance() -> Self {
        Rational::zero()
    }

    fn pivot_weight(&self) -> f64 {
        // Small numerators and denominators keep intermediate growth bounded.
        -((self.numer().bits() + self.denom().bits()) as f64)
    }
}

/// Converts a rational without overflowing when numerator and denominator
/// are individually larger than `f64::MAX`.
pub fn ratio_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    if d == 0.0 {
        // Denominator vanished after the shift: value is astronomically large.
        return if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    n / d
}

/// Parses `"a/b"`, an integer, or a decimal literal such as `"0.125"` or
/// `"1e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in '{s}'")))?;
        let den: BigInt = d
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in '{s}'")))?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{s}'")));
        }
        return Ok(BigRational::new(num, den));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a number: '{s}'"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let digits = digits / BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(digits);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("7/3").unwrap(), Rational::from_ratio(7, 3));
        assert_eq!(parse_rational("0.125").unwrap(), Rational::from_ratio(1, 8));
        assert_eq!(parse_rational("-2").unwrap(), Rational::from_ratio(-2, 1));
        assert_eq!(parse_rational("1e-3").unwrap(), Rational::from_ratio(1, 1000));
        assert_eq!(parse_rational("2.5E1").unwrap(), Rational::from_ratio(25, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn float_conversion_uses_shortest_decimal() {
        assert_eq!(Rational::from_f64(0.1).unwrap(), Rational::from_ratio(1, 10));
        assert_eq!(Rational::from_f64(0.6).unwrap(), Rational::from_ratio(3, 5));
        assert!(Rational::from_f64(f64::NAN).is_none());
    }

    #[test]
    fn huge_rationals_convert_to_float() {
        let big = num_traits::pow(BigInt::from(3), 2000);
        let r = BigRational::new(big.clone() + BigInt::from(1), big * BigInt::from(2));
        assert!((ratio_to_f64(&r) - 0.5).abs() < 1e-15);
    }
}

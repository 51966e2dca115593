//! Numeric abstraction for masses, measures and weights.
//!
//! Every algebraic routine in this crate is written against [`Scalar`], so the
//! same code runs in floating point (`f64`, `f32`) and in exact arithmetic
//! ([`Rational`]). Exact runs have zero tolerance: two rational masses are
//! equal only if they are identical.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Arbitrary precision rational used for exact computations.
pub type Rational = BigRational;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Absolute tolerance for equality checks on masses and measures.
    fn default_tolerance() -> Self;

    /// Magnitudes at or below this are treated as exact zeros and dropped.
    fn negligible() -> Self;

    /// Parses a decimal literal as written by `Display`.
    fn parse_text(text: &str) -> Option<Self>;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::zero)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).unwrap_or_else(Self::zero) / Self::from_i64(den).unwrap_or_else(Self::one)
    }

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::negligible()
    }

    fn approx_eq(&self, other: &Self, tol: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= *tol
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    fn default_tolerance() -> Self {
        1e-9
    }
    fn negligible() -> Self {
        1e-12
    }
    fn parse_text(text: &str) -> Option<Self> {
        text.trim().parse().ok().filter(|v: &f64| v.is_finite())
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
    fn from_f64_lossy(v: f64) -> Self {
        v
    }
}

impl Scalar for f32 {
    fn default_tolerance() -> Self {
        1e-5
    }
    fn negligible() -> Self {
        1e-8
    }
    fn parse_text(text: &str) -> Option<Self> {
        text.trim().parse().ok().filter(|v: &f32| v.is_finite())
    }
    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
    fn from_f64_lossy(v: f64) -> Self {
        v as f32
    }
}

impl Scalar for BigRational {
    fn default_tolerance() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
    fn negligible() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }
    fn parse_text(text: &str) -> Option<Self> {
        parse_exact(text)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Parses a decimal literal such as `0.05` or `-1.5e-3` exactly into a
/// rational, or an explicit fraction `5/98`.
pub fn parse_exact(text: &str) -> Option<Rational> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(all);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -value } else { value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn exact_decimal_parsing() {
        assert_eq!(parse_exact("0.05"), Some(Rational::from_ratio(1, 20)));
        assert_eq!(parse_exact("-1.5e-1"), Some(Rational::from_ratio(-3, 20)));
        assert_eq!(parse_exact("5/98"), Some(Rational::from_ratio(5, 98)));
        assert_eq!(parse_exact("12"), Some(Rational::from_ratio(12, 1)));
        assert_eq!(parse_exact("abc"), None);
        assert_eq!(parse_exact("1/0"), None);
    }

    #[test]
    fn tolerances_by_type() {
        assert_eq!(f64::default_tolerance(), 1e-9);
        assert!(Rational::default_tolerance().is_zero());
        assert!(!Rational::from_ratio(1, 1_000_000_000_000).is_negligible());
        assert!(1e-13f64.is_negligible());
    }
}

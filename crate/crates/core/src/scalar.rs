//! Arithmetic modes.
//!
//! Every weight is carried either as an exact rational ([`Rational`]) or as an
//! `f64`. Algorithms are written once against [`Scalar`]; identities are
//! checked with `Rational`, large sweeps run with `f64`.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub type Rational = BigRational;

/// Arithmetic mode selector used by the CLI and the sweep driver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    #[default]
    Float,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    const EXACT: bool;

    fn from_f64(x: f64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// Exact value when available (always for rationals, via the binary
    /// expansion for finite floats).
    fn to_rational(&self) -> Option<Rational>;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;

    /// Zero test used by elimination and degree detection. Exact for
    /// rationals; relative to `scale` for floats.
    fn is_negligible(&self, scale: f64) -> bool;

    /// Pivot preference for Gaussian elimination; larger is better.
    fn pivot_score(&self) -> f64;

    fn parse_weight(s: &str) -> Result<Self>;
    fn weight_string(&self) -> String;

    /// det(m), by fraction-free elimination (exact) or partial pivoting (float).
    fn determinant(m: &DenseMatrix<Self>) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn powi(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
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

/// Tolerance used by float-mode zero tests, relative to the magnitude scale.
pub const FLOAT_ZERO_TOL: f64 = 1e-9;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_rational(r: &Rational) -> Self {
        rational_to_f64(r)
    }
    fn to_rational(&self) -> Option<Rational> {
        BigRational::from_float(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn is_negligible(&self, scale: f64) -> bool {
        f64::abs(*self) <= FLOAT_ZERO_TOL * scale.max(f64::MIN_POSITIVE)
    }
    fn pivot_score(&self) -> f64 {
        f64::abs(*self)
    }
    fn parse_weight(s: &str) -> Result<Self> {
        let r = parse_rational(s)?;
        Ok(rational_to_f64(&r))
    }
    fn weight_string(&self) -> String {
        format!("{self:?}")
    }
    fn determinant(m: &DenseMatrix<Self>) -> Self {
        crate::linalg::det_partial_pivot(m)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Option<Rational> {
        Some(self.clone())
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn is_negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
    fn pivot_score(&self) -> f64 {
        // Any nonzero pivot is exact; prefer short ones to limit growth.
        if self.is_zero() {
            0.0
        } else {
            1.0 / (1.0 + (self.numer().bits() + self.denom().bits()) as f64)
        }
    }
    fn parse_weight(s: &str) -> Result<Self> {
        parse_rational(s)
    }
    fn weight_string(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
    fn determinant(m: &DenseMatrix<Self>) -> Self {
        crate::linalg::det_fraction_free(m)
    }
}

/// Converts a rational to the nearest-ish f64 without overflowing on huge
/// numerators and denominators.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n: BigInt = r.numer() >> shift_n as usize;
    let d: BigInt = r.denom() >> shift_d as usize;
    let base = n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0);
    base * 2f64.powi((shift_n - shift_d) as i32)
}

/// Parses `"p/q"`, an integer, or a plain decimal (`"0.125"`, `"1e-3"`) into
/// an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::ParseWeight(s.to_string());
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], i64::from_str(&t[i + 1..]).map_err(|_| bad())?),
        None => (t, 0),
    };
    let negative = mantissa.starts_with('-');
    let body = mantissa.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i64;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_and_fraction_exactly() {
        assert_eq!(parse_rational("0.25").unwrap(), rational(1, 4));
        assert_eq!(parse_rational("3/12").unwrap(), rational(1, 4));
        assert_eq!(parse_rational("-1.5e-1").unwrap(), rational(-3, 20));
        assert_eq!(parse_rational("7").unwrap(), rational(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn huge_rational_converts_without_overflow() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let r = BigRational::new(big.clone() * 3, big);
        assert!((rational_to_f64(&r) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = rational(2, 3);
        assert_eq!(x.powi(5), rational(32, 243));
        assert_eq!(1.5f64.powi(0), 1.0);
    }
}

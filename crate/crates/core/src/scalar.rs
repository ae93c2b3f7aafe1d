//! Scalar backends.
//!
//! Every form, vector and matrix in this crate is generic over a [`Scalar`].
//! Two backends exist: arbitrary precision rationals ([`Rational`]), where
//! zero tests and sign decisions are literal, and `f64`, where they go
//! through an explicit tolerance. A value never mixes the two; converting
//! from exact to float is an explicit call (`to_float`).

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

/// Which arithmetic a value was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Exact => f.write_str("exact"),
            Backend::Float => f.write_str("float"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid number literal `{0}`")]
pub struct ParseScalarError(pub String);

/// Field operations shared by both backends.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    const BACKEND: Backend;

    fn from_i64(n: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;

    /// Exact backend: literal zero test. Float backend: `|x| <= tol`.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Square root if it exists in this backend (rationals: perfect squares only).
    fn sqrt(&self) -> Option<Self>;

    /// Parse a coefficient string: integer, decimal, exponent or `p/q`.
    fn parse_coef(s: &str) -> Result<Self, ParseScalarError>;

    /// Canonical string used in JSON output.
    fn to_coef_string(&self) -> String {
        self.to_string()
    }

    fn is_exact() -> bool {
        Self::BACKEND == Backend::Exact
    }

    /// Sign with tolerance: -1, 0 or 1.
    fn sign(&self, tol: f64) -> i8 {
        if self.is_negligible(tol) {
            0
        } else if *self > Self::zero() {
            1
        } else {
            -1
        }
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Exact;

    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Ratio<BigInt>::to_f64 only fails on overflow of both parts.
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rational::new(n, d))
        } else {
            None
        }
    }

    fn parse_coef(s: &str) -> Result<Self, ParseScalarError> {
        parse_rational(s)
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn from_rational(q: &Rational) -> Self {
        Scalar::to_f64(q)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn is_negligible(&self, tol: f64) -> bool {
        f64::abs(*self) <= tol
    }

    fn sqrt(&self) -> Option<Self> {
        if *self < 0.0 {
            None
        } else {
            Some(f64::sqrt(*self))
        }
    }

    fn parse_coef(s: &str) -> Result<Self, ParseScalarError> {
        let t = s.trim();
        if t.contains('/') {
            return parse_rational(t).map(|q| Scalar::to_f64(&q));
        }
        t.parse::<f64>().map_err(|_| ParseScalarError(s.to_string()))
    }
}

/// Parse an exact rational from `p/q`, an integer, a decimal or a decimal
/// with exponent (`1.5e-3`).
pub fn parse_rational(s: &str) -> Result<Rational, ParseScalarError> {
    let err = || ParseScalarError(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = parse_rational(p).map_err(|_| err())?;
        let q = parse_rational(q).map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..].parse().map_err(|_| err())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| err())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u8);
    let mut q = Rational::from_integer(numer);
    if scale >= 0 {
        q *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -q } else { q })
}

/// Shorthand for an exact rational `n/d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Tolerances used by the float backend. The exact backend ignores them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Residual tolerance relative to the largest input coefficient.
    pub residual: f64,
    /// Pivot threshold for rank and kernel computations, relative to the matrix scale.
    pub pivot: f64,
    /// Half-width of the band around zero in which a float `lambda` is indeterminate,
    /// relative to `(max |coef|)^4`.
    pub lambda_band: f64,
}

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;
pub const DEFAULT_PIVOT_TOL: f64 = 1e-10;
pub const DEFAULT_LAMBDA_BAND: f64 = 1e-8;
pub const TOLERANCE_ENV: &str = "SIXFORM_TOLERANCE";

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: DEFAULT_RESIDUAL_TOL,
            pivot: DEFAULT_PIVOT_TOL,
            lambda_band: DEFAULT_LAMBDA_BAND,
        }
    }
}

impl Tolerances {
    /// Defaults, with the residual tolerance overridden by `SIXFORM_TOLERANCE` when set.
    pub fn from_env() -> Self {
        let mut tol = Tolerances::default();
        if let Some(v) = std::env::var(TOLERANCE_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| *v > 0.0 && v.is_finite())
        {
            tol.residual = v;
        }
        tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_literals() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-1").unwrap(), rat(-1, 1));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("-2.5e-1").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("12E2").unwrap(), rat(1200, 1));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("-").is_err());
    }

    #[test]
    fn rational_sqrt_only_for_squares() {
        assert_eq!(Scalar::sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(Scalar::sqrt(&rat(2, 1)), None);
        assert_eq!(Scalar::sqrt(&rat(-4, 1)), None);
        assert_eq!(Scalar::sqrt(&2.25f64), Some(1.5));
    }

    #[test]
    fn float_coef_accepts_fractions() {
        assert_eq!(f64::parse_coef("1/4").unwrap(), 0.25);
        assert_eq!(f64::parse_coef("-3.5").unwrap(), -3.5);
    }

    #[test]
    fn signs_respect_tolerance() {
        assert_eq!(1e-12f64.sign(1e-10), 0);
        assert_eq!((-1e-3f64).sign(1e-10), -1);
        assert_eq!(rat(1, 1_000_000_000).sign(1.0), 1);
    }
}

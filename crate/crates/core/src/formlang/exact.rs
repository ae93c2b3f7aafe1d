//! Exact values of the form `a + bπ` with rational `a`, `b`. Enough to
//! evaluate σ exactly on the lines `x₃ + x₄ = kπ/2`.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::{parse_rational, ParseScalarError, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiRational {
    pub rational: Rational,
    pub pi: Rational,
}

impl PiRational {
    pub fn new(rational: Rational, pi: Rational) -> Self {
        PiRational { rational, pi }
    }

    pub fn rational(q: Rational) -> Self {
        PiRational { rational: q, pi: Rational::zero() }
    }

    /// `q·π`.
    pub fn pi_multiple(q: Rational) -> Self {
        PiRational { rational: Rational::zero(), pi: q }
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.pi.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.pi.is_zero().then_some(&self.rational)
    }

    pub fn to_f64(&self) -> f64 {
        self.rational.to_f64().unwrap_or(f64::NAN) + self.pi.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI
    }

    /// `None` when both sides carry a `π` part.
    pub fn checked_mul(&self, o: &PiRational) -> Option<PiRational> {
        match (self.as_rational(), o.as_rational()) {
            (Some(a), _) => Some(PiRational::new(a * &o.rational, a * &o.pi)),
            (_, Some(b)) => Some(PiRational::new(&self.rational * b, &self.pi * b)),
            _ => None,
        }
    }

    /// Division by a nonzero rational; `None` otherwise.
    pub fn checked_div(&self, o: &PiRational) -> Option<PiRational> {
        let d = o.as_rational()?;
        if d.is_zero() {
            return None;
        }
        Some(PiRational::new(&self.rational / d, &self.pi / d))
    }

    pub fn checked_powi(&self, n: i32) -> Option<PiRational> {
        if n == 0 {
            return Some(PiRational::one());
        }
        if n == 1 {
            return Some(self.clone());
        }
        let q = self.as_rational()?;
        if q.is_zero() && n < 0 {
            return None;
        }
        let base = if n < 0 { q.recip() } else { q.clone() };
        Some(PiRational::rational(num_traits::pow(base, n.unsigned_abs() as usize)))
    }

    /// `sin` at rational multiples of `π` whose sine is rational
    /// (multiples of `π/6` with values `0, ±1/2, ±1`).
    pub fn exact_sin(&self) -> Option<PiRational> {
        if !self.rational.is_zero() {
            return None;
        }
        // reduce b modulo 2 into [0, 2)
        let two = Rational::from_integer(2.into());
        let mut b = &self.pi % &two;
        if b.is_negative() {
            b += &two;
        }
        let sixths = &b * Rational::from_integer(6.into());
        if !sixths.is_integer() {
            return None;
        }
        let k = sixths.to_integer().to_i64()?;
        let value = match k {
            0 | 6 => Rational::zero(),
            1 | 5 => Rational::new(1.into(), 2.into()),
            3 => Rational::one(),
            7 | 11 => Rational::new((-1).into(), 2.into()),
            9 => -Rational::one(),
            _ => return None,
        };
        Some(PiRational::rational(value))
    }

    /// `cos(x) = sin(x + π/2)`.
    pub fn exact_cos(&self) -> Option<PiRational> {
        let shifted = PiRational::new(self.rational.clone(), &self.pi + Rational::new(1.into(), 2.into()));
        shifted.exact_sin()
    }
}

impl Add for PiRational {
    type Output = PiRational;
    fn add(self, o: PiRational) -> PiRational {
        PiRational::new(self.rational + o.rational, self.pi + o.pi)
    }
}

impl Sub for PiRational {
    type Output = PiRational;
    fn sub(self, o: PiRational) -> PiRational {
        PiRational::new(self.rational - o.rational, self.pi - o.pi)
    }
}

impl Neg for PiRational {
    type Output = PiRational;
    fn neg(self) -> PiRational {
        PiRational::new(-self.rational, -self.pi)
    }
}

impl fmt::Display for PiRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rational.is_zero(), self.pi.is_zero()) {
            (_, true) => write!(f, "{}", self.rational),
            (true, false) => write!(f, "{}pi", self.pi),
            (false, false) => write!(f, "{}+{}pi", self.rational, self.pi),
        }
    }
}

/// Parse a coordinate value: a rational literal (`"1/3"`, `"0.25"`) or a
/// rational multiple of π (`"pi"`, `"-pi/4"`, `"3pi/2"`, `"3*pi/2"`, `"2/3pi"`).
pub fn parse_pi_rational(s: &str) -> Result<PiRational, ParseScalarError> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(at) = t.find("pi") else {
        return parse_rational(&t).map(PiRational::rational);
    };
    let before = t[..at].trim_end_matches('*');
    let after = &t[at + 2..];
    let mut coef = match before {
        "" | "+" => Rational::one(),
        "-" => -Rational::one(),
        _ => parse_rational(before)?,
    };
    if !after.is_empty() {
        let den = after
            .strip_prefix('/')
            .ok_or_else(|| ParseScalarError(format!("unexpected text after pi in {s:?}")))?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return Err(ParseScalarError(format!("zero denominator in {s:?}")));
        }
        coef /= den;
    }
    Ok(PiRational::pi_multiple(coef))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn parses_pi_multiples() {
        assert_eq!(parse_pi_rational("pi/2").unwrap(), PiRational::pi_multiple(rat(1, 2)));
        assert_eq!(parse_pi_rational("3pi/2").unwrap(), PiRational::pi_multiple(rat(3, 2)));
        assert_eq!(parse_pi_rational("3*pi/2").unwrap(), PiRational::pi_multiple(rat(3, 2)));
        assert_eq!(parse_pi_rational("-pi").unwrap(), PiRational::pi_multiple(rat(-1, 1)));
        assert_eq!(parse_pi_rational(" 0.25 ").unwrap(), PiRational::rational(rat(1, 4)));
        assert!(parse_pi_rational("pi*2").is_err());
        assert!(parse_pi_rational("abc").is_err());
    }

    #[test]
    fn exact_trig_table_matches_float() {
        for (k, d) in (-12..=12).flat_map(|k| [(k, 6), (k, 4)]) {
            let x = PiRational::pi_multiple(rat(k, d));
            for (exact, float) in [(x.exact_sin(), x.to_f64().sin()), (x.exact_cos(), x.to_f64().cos())] {
                if let Some(v) = exact {
                    assert!((v.to_f64() - float).abs() < 1e-12, "k = {k}");
                } else {
                    // irrational values: ±√2/2, ±√3/2
                    let a = float.abs();
                    assert!((a - 0.5f64.sqrt()).abs() < 1e-12 || (a - 0.75f64.sqrt()).abs() < 1e-12, "k = {k}");
                }
            }
        }
        assert_eq!(PiRational::rational(rat(1, 1)).exact_sin(), None);
    }

    #[test]
    fn products_of_pi_parts_are_not_exact() {
        let p = PiRational::pi_multiple(rat(1, 1));
        assert_eq!(p.checked_mul(&p), None);
        assert_eq!(p.checked_mul(&PiRational::rational(rat(2, 1))), Some(PiRational::pi_multiple(rat(2, 1))));
    }
}

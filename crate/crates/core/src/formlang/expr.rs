//! Coefficient expressions: a small immutable AST with exact symbolic
//! differentiation and float / exact evaluation.
//!
//! Smart constructors keep expressions in a light normal form: constants are
//! folded, `0` and `1` are absorbed, nested sums and products are flattened,
//! and syntactically equal summands are merged. There is no further
//! simplification.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::exact::PiRational;
use super::DomainError;
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Rational),
    /// Coordinate `x_{i+1}` (0-based).
    Var(usize),
    Neg(Arc<Expr>),
    /// At least two summands; constants folded into one trailing constant.
    Sum(Arc<[Expr]>),
    /// At least two factors; a constant factor, if any, comes first and is
    /// neither `1` nor `-1`.
    Product(Arc<[Expr]>),
    Quotient(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, i32),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Sqrt(Arc<Expr>),
}

pub fn constant(q: Rational) -> Expr {
    Expr::Const(q)
}

pub fn int(n: i64) -> Expr {
    Expr::Const(Rational::from_integer(n.into()))
}

/// Coordinate `x_i`, 1-based.
pub fn var(i: usize) -> Expr {
    assert!((1..=6).contains(&i), "coordinate index {i} out of range");
    Expr::Var(i - 1)
}

impl Expr {
    pub fn zero() -> Expr {
        int(0)
    }

    pub fn one() -> Expr {
        int(1)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(q) if q.is_zero())
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Const(_) | Expr::Var(_) => 0,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Sqrt(a) => a.size(),
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().map(Expr::size).sum(),
            Expr::Quotient(a, b) => a.size() + b.size(),
        }
    }

    pub fn depends_on(&self, i: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(j) => *j == i,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Sqrt(a) => a.depends_on(i),
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(|x| x.depends_on(i)),
            Expr::Quotient(a, b) => a.depends_on(i) || b.depends_on(i),
        }
    }

    /// Split off a rational coefficient: `self = c · core`.
    fn split_coefficient(&self) -> (Rational, Expr) {
        match self {
            Expr::Const(q) => (q.clone(), Expr::one()),
            Expr::Neg(a) => {
                let (c, core) = a.split_coefficient();
                (-c, core)
            }
            Expr::Product(fs) => match &fs[0] {
                Expr::Const(q) => (q.clone(), product_of(fs[1..].to_vec())),
                _ => (Rational::one(), self.clone()),
            },
            _ => (Rational::one(), self.clone()),
        }
    }

    /// Partial derivative with respect to `x_{i+1}` (0-based `i`).
    pub fn diff(&self, i: usize) -> Expr {
        if !self.depends_on(i) {
            return Expr::zero();
        }
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(j) => {
                if *j == i {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Neg(a) => neg(a.diff(i)),
            Expr::Sum(xs) => add(xs.iter().map(|x| x.diff(i)).collect()),
            Expr::Product(fs) => {
                let mut terms = Vec::new();
                for k in 0..fs.len() {
                    let dk = fs[k].diff(i);
                    if dk.is_zero() {
                        continue;
                    }
                    let mut factors = fs.to_vec();
                    factors[k] = dk;
                    terms.push(mul(factors));
                }
                add(terms)
            }
            Expr::Quotient(a, b) => {
                let da = a.diff(i);
                let db = b.diff(i);
                if db.is_zero() {
                    return div(da, (**b).clone());
                }
                let top = sub(mul(vec![da, (**b).clone()]), mul(vec![(**a).clone(), db]));
                div(top, pow((**b).clone(), 2))
            }
            Expr::Pow(a, n) => mul(vec![int(*n as i64), pow((**a).clone(), n - 1), a.diff(i)]),
            Expr::Sin(a) => mul(vec![cos((**a).clone()), a.diff(i)]),
            Expr::Cos(a) => neg(mul(vec![sin((**a).clone()), a.diff(i)])),
            Expr::Sqrt(a) => div(a.diff(i), mul(vec![int(2), Expr::Sqrt(a.clone())])),
        }
    }

    /// Float evaluation; `x[k]` is the value of `x_{k+1}`.
    pub fn eval(&self, x: &[f64; 6]) -> Result<f64, DomainError> {
        let v = match self {
            Expr::Const(q) => q.to_f64().unwrap_or(f64::NAN),
            Expr::Var(j) => x[*j],
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Sum(xs) => {
                let mut s = 0.0;
                for t in xs.iter() {
                    s += t.eval(x)?;
                }
                s
            }
            Expr::Product(fs) => {
                let mut p = 1.0;
                for f in fs.iter() {
                    p *= f.eval(x)?;
                }
                p
            }
            Expr::Quotient(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(DomainError::DivisionByZero(self.to_string()));
                }
                a.eval(x)? / d
            }
            Expr::Pow(a, n) => {
                let b = a.eval(x)?;
                if b == 0.0 && *n < 0 {
                    return Err(DomainError::DivisionByZero(self.to_string()));
                }
                b.powi(*n)
            }
            Expr::Sin(a) => a.eval(x)?.sin(),
            Expr::Cos(a) => a.eval(x)?.cos(),
            Expr::Sqrt(a) => {
                let v = a.eval(x)?;
                if v < 0.0 {
                    return Err(DomainError::NegativeSqrt(self.to_string()));
                }
                v.sqrt()
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DomainError::NonFinite(self.to_string()))
        }
    }

    /// Exact evaluation over `Q + Qπ`. `Ok(None)` means the value is not of
    /// that shape (e.g. `sin(1)`, `π²`); callers fall back to floats.
    pub fn eval_exact(&self, x: &[PiRational; 6]) -> Result<Option<PiRational>, DomainError> {
        Ok(match self {
            Expr::Const(q) => Some(PiRational::rational(q.clone())),
            Expr::Var(j) => Some(x[*j].clone()),
            Expr::Neg(a) => a.eval_exact(x)?.map(|v| -v),
            Expr::Sum(xs) => {
                let mut s = Some(PiRational::zero());
                for t in xs.iter() {
                    let v = t.eval_exact(x)?;
                    s = s.zip(v).map(|(a, b)| a + b);
                }
                s
            }
            Expr::Product(fs) => {
                // evaluate every factor so domain errors are never skipped
                let mut p = Some(PiRational::one());
                let mut zero = false;
                for f in fs.iter() {
                    let v = f.eval_exact(x)?;
                    if v.as_ref().is_some_and(PiRational::is_zero) {
                        zero = true;
                    }
                    p = p.zip(v).and_then(|(a, b)| a.checked_mul(&b));
                }
                if zero {
                    Some(PiRational::zero())
                } else {
                    p
                }
            }
            Expr::Quotient(a, b) => {
                let d = b.eval_exact(x)?;
                if d.as_ref().is_some_and(PiRational::is_zero) {
                    return Err(DomainError::DivisionByZero(self.to_string()));
                }
                let n = a.eval_exact(x)?;
                n.zip(d).and_then(|(n, d)| n.checked_div(&d))
            }
            Expr::Pow(a, n) => match a.eval_exact(x)? {
                Some(b) if b.is_zero() && *n < 0 => return Err(DomainError::DivisionByZero(self.to_string())),
                Some(b) => b.checked_powi(*n),
                None => None,
            },
            Expr::Sin(a) => a.eval_exact(x)?.and_then(|v| v.exact_sin()),
            Expr::Cos(a) => a.eval_exact(x)?.and_then(|v| v.exact_cos()),
            Expr::Sqrt(a) => match a.eval_exact(x)? {
                Some(v) => match v.as_rational() {
                    Some(q) if q.is_negative() => return Err(DomainError::NegativeSqrt(self.to_string())),
                    Some(q) => crate::scalar::Scalar::sqrt(q).map(PiRational::rational),
                    None => None,
                },
                None => None,
            },
        })
    }
}

fn product_of(mut factors: Vec<Expr>) -> Expr {
    match factors.len() {
        0 => Expr::one(),
        1 => factors.pop().expect("one factor"),
        _ => Expr::Product(factors.into()),
    }
}

pub fn neg(e: Expr) -> Expr {
    match e {
        Expr::Const(q) => Expr::Const(-q),
        Expr::Neg(a) => (*a).clone(),
        Expr::Product(fs) if fs[0].is_const() => {
            let mut factors = fs.to_vec();
            let c = factors[0].as_const().expect("constant factor").clone();
            factors[0] = Expr::Const(-c);
            Expr::Product(factors.into())
        }
        other => Expr::Neg(Arc::new(other)),
    }
}

/// Sum with flattening, constant folding and merging of equal summands
/// (first-occurrence order is kept).
pub fn add(terms: Vec<Expr>) -> Expr {
    let mut flat = Vec::with_capacity(terms.len());
    for t in terms {
        match t {
            Expr::Sum(xs) => flat.extend(xs.iter().cloned()),
            other => flat.push(other),
        }
    }
    let mut constant = Rational::zero();
    let mut merged: Vec<(Rational, Expr)> = Vec::new();
    for t in flat {
        if let Expr::Const(q) = &t {
            constant += q;
            continue;
        }
        let (c, core) = t.split_coefficient();
        match merged.iter_mut().find(|(_, k)| *k == core) {
            Some(slot) => slot.0 += c,
            None => merged.push((c, core)),
        }
    }
    let mut out: Vec<Expr> = merged
        .into_iter()
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, core)| mul(vec![Expr::Const(c), core]))
        .collect();
    if !constant.is_zero() {
        out.push(Expr::Const(constant));
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().expect("one term"),
        _ => Expr::Sum(out.into()),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    add(vec![a, neg(b)])
}

/// Product with flattening, constant folding, sign extraction and `0`/`1`
/// absorption.
pub fn mul(factors: Vec<Expr>) -> Expr {
    let mut constant = Rational::one();
    let mut rest = Vec::with_capacity(factors.len());
    let mut stack: Vec<Expr> = factors.into_iter().rev().collect();
    while let Some(f) = stack.pop() {
        match f {
            Expr::Const(q) => constant *= q,
            Expr::Neg(a) => {
                constant = -constant;
                stack.push((*a).clone());
            }
            Expr::Product(fs) => stack.extend(fs.iter().rev().cloned()),
            other => rest.push(other),
        }
    }
    if constant.is_zero() {
        return Expr::zero();
    }
    if rest.is_empty() {
        return Expr::Const(constant);
    }
    if constant == -Rational::one() {
        return Expr::Neg(Arc::new(product_of(rest)));
    }
    if !constant.is_one() {
        rest.insert(0, Expr::Const(constant));
    }
    product_of(rest)
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (_, Expr::Const(q)) if q.is_one() => a,
        (Expr::Const(p), Expr::Const(q)) if !q.is_zero() => Expr::Const(p / q),
        (_, Expr::Const(q)) if !q.is_zero() => mul(vec![Expr::Const(q.recip()), a]),
        (Expr::Const(p), _) if p.is_zero() => Expr::zero(),
        _ => Expr::Quotient(Arc::new(a), Arc::new(b)),
    }
}

pub fn pow(a: Expr, n: i32) -> Expr {
    match (&a, n) {
        (_, 0) => Expr::one(),
        (_, 1) => a,
        (Expr::Const(q), _) if !q.is_zero() || n > 0 => {
            let base = if n < 0 { q.recip() } else { q.clone() };
            Expr::Const(num_traits::pow(base, n.unsigned_abs() as usize))
        }
        _ => Expr::Pow(Arc::new(a), n),
    }
}

pub fn sin(a: Expr) -> Expr {
    match &a {
        Expr::Const(q) if q.is_zero() => Expr::zero(),
        _ => Expr::Sin(Arc::new(a)),
    }
}

pub fn cos(a: Expr) -> Expr {
    match &a {
        Expr::Const(q) if q.is_zero() => Expr::one(),
        _ => Expr::Cos(Arc::new(a)),
    }
}

pub fn sqrt(a: Expr) -> Expr {
    if let Expr::Const(q) = &a {
        if let Some(r) = crate::scalar::Scalar::sqrt(q) {
            return Expr::Const(r);
        }
    }
    Expr::Sqrt(Arc::new(a))
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        mul(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

// Printing. Levels: 0 top, 1 summand, 2 factor or quotient operand, 3 power
// base.

fn fmt_const(q: &Rational, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level == 0 || q.is_integer() && !q.is_negative() {
        write!(f, "{q}")
    } else {
        write!(f, "({q})")
    }
}

impl Expr {
    fn fmt_at(&self, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(q) => fmt_const(q, level, f),
            Expr::Var(j) => write!(f, "x{}", j + 1),
            Expr::Neg(a) => {
                if level >= 2 {
                    f.write_str("(")?;
                }
                f.write_str("-")?;
                a.fmt_at(2, f)?;
                if level >= 2 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Sum(xs) => {
                if level >= 1 {
                    f.write_str("(")?;
                }
                for (k, t) in xs.iter().enumerate() {
                    let (c, core) = t.split_coefficient();
                    if c.is_negative() {
                        f.write_str(if k == 0 { "-" } else { " - " })?;
                        mul(vec![Expr::Const(-c), core]).fmt_at(1, f)?;
                    } else {
                        if k > 0 {
                            f.write_str(" + ")?;
                        }
                        t.fmt_at(1, f)?;
                    }
                }
                if level >= 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Product(fs) => {
                let negative_lead = fs[0].as_const().is_some_and(|q| q.is_negative());
                let parens = level >= 2 || (negative_lead && level >= 1);
                if parens {
                    f.write_str("(")?;
                }
                for (k, x) in fs.iter().enumerate() {
                    if k == 0 {
                        if let Expr::Const(q) = x {
                            if q.is_negative() {
                                f.write_str("-")?;
                                fmt_const(&-q.clone(), 2, f)?;
                                continue;
                            }
                        }
                    } else {
                        f.write_str("*")?;
                    }
                    x.fmt_at(2, f)?;
                }
                if parens {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Quotient(a, b) => {
                if level >= 2 {
                    f.write_str("(")?;
                }
                a.fmt_at(2, f)?;
                f.write_str("/")?;
                b.fmt_at(2, f)?;
                if level >= 2 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Pow(a, n) => {
                if level >= 3 {
                    f.write_str("(")?;
                }
                a.fmt_at(3, f)?;
                write!(f, "**{n}")?;
                if level >= 3 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(0, f)
    }
}

struct AtLevel<'a>(&'a Expr, u8);

impl fmt::Display for AtLevel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_at(self.1, f)
    }
}

impl Expr {
    /// The expression reads as `-(...)` when printed.
    pub(crate) fn has_negative_sign(&self) -> bool {
        self.split_coefficient().0.is_negative()
    }

    pub(crate) fn display_at(&self, level: u8) -> impl fmt::Display + '_ {
        AtLevel(self, level)
    }
}

/// Memo table for [`Expr::eval_cached`], keyed by the address of shared
/// subtrees. Only valid for one point and while the expressions are alive.
#[derive(Debug, Default)]
pub struct EvalCache {
    values: HashMap<(usize, u8), f64>,
}

impl EvalCache {
    pub fn new() -> Self {
        Self::default()
    }
}

fn eval_shared(a: &Arc<Expr>, x: &[f64; 6], cache: &mut EvalCache) -> Result<f64, DomainError> {
    let key = (Arc::as_ptr(a) as usize, 0);
    if let Some(v) = cache.values.get(&key) {
        return Ok(*v);
    }
    let v = a.eval_cached(x, cache)?;
    cache.values.insert(key, v);
    Ok(v)
}

impl Expr {
    /// Float evaluation that reuses values of subtrees shared through `Arc`
    /// (derivatives of large expressions share most of their structure).
    pub fn eval_cached(&self, x: &[f64; 6], cache: &mut EvalCache) -> Result<f64, DomainError> {
        let v = match self {
            Expr::Const(_) | Expr::Var(_) => return self.eval(x),
            Expr::Neg(a) => -eval_shared(a, x, cache)?,
            Expr::Sum(xs) | Expr::Product(xs) => {
                let is_sum = matches!(self, Expr::Sum(_));
                let key = (xs.as_ptr() as usize, if is_sum { 1 } else { 2 });
                if let Some(v) = cache.values.get(&key) {
                    return Ok(*v);
                }
                let mut acc = if is_sum { 0.0 } else { 1.0 };
                for t in xs.iter() {
                    let v = t.eval_cached(x, cache)?;
                    if is_sum {
                        acc += v;
                    } else {
                        acc *= v;
                    }
                }
                cache.values.insert(key, acc);
                acc
            }
            Expr::Quotient(a, b) => {
                let d = eval_shared(b, x, cache)?;
                if d == 0.0 {
                    return Err(DomainError::DivisionByZero(self.to_string()));
                }
                eval_shared(a, x, cache)? / d
            }
            Expr::Pow(a, n) => {
                let b = eval_shared(a, x, cache)?;
                if b == 0.0 && *n < 0 {
                    return Err(DomainError::DivisionByZero(self.to_string()));
                }
                b.powi(*n)
            }
            Expr::Sin(a) => eval_shared(a, x, cache)?.sin(),
            Expr::Cos(a) => eval_shared(a, x, cache)?.cos(),
            Expr::Sqrt(a) => {
                let v = eval_shared(a, x, cache)?;
                if v < 0.0 {
                    return Err(DomainError::NegativeSqrt(self.to_string()));
                }
                v.sqrt()
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DomainError::NonFinite(self.to_string()))
        }
    }
}

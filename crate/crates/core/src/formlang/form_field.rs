//! Forms on a single chart of `R^6` with expression coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::exact::{parse_pi_rational, PiRational};
use super::expr::{self, Expr};
use super::{parser, DomainError, FormlangError};
use crate::exterior::{basis_indices, KForm, MultiIndex};
use crate::scalar::{ParseScalarError, Rational};

pub const CHART_DIM: usize = 6;

/// A point of the chart, exact when every coordinate is `a + bπ` with
/// rational `a`, `b`.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Exact([PiRational; 6]),
    Float([f64; 6]),
}

impl Point {
    pub fn to_float(&self) -> [f64; 6] {
        match self {
            Point::Exact(x) => std::array::from_fn(|k| x[k].to_f64()),
            Point::Float(x) => *x,
        }
    }

    /// Parse six coordinate strings (`"0"`, `"1/3"`, `"pi/2"`, `"3pi/2"`, ...).
    pub fn parse(coords: &[&str]) -> Result<Point, ParseScalarError> {
        if coords.len() != CHART_DIM {
            return Err(ParseScalarError(format!("expected 6 coordinates, got {}", coords.len())));
        }
        let values = coords.iter().map(|c| parse_pi_rational(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(Point::Exact(values.try_into().expect("six coordinates")))
    }

    pub fn origin() -> Point {
        Point::Exact(std::array::from_fn(|_| PiRational::zero()))
    }

    pub fn coordinate_strings(&self) -> Vec<String> {
        match self {
            Point::Exact(x) => x.iter().map(ToString::to_string).collect(),
            Point::Float(x) => x.iter().map(ToString::to_string).collect(),
        }
    }
}

/// Value of a field at a point.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldValue {
    Exact(KForm<Rational>),
    Float(KForm<f64>),
}

impl FieldValue {
    pub fn to_float(&self) -> KForm<f64> {
        match self {
            FieldValue::Exact(k) => k.to_float(),
            FieldValue::Float(k) => k.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, FieldValue::Exact(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormField {
    degree: usize,
    terms: BTreeMap<MultiIndex, Expr>,
}

impl FormField {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= CHART_DIM, "degree {degree} exceeds the chart dimension");
        FormField { degree, terms: BTreeMap::new() }
    }

    /// Constant field with the coefficients of `form`.
    pub fn constant(form: &KForm<Rational>) -> Self {
        assert_eq!(form.dim(), CHART_DIM, "constant fields live on R^6");
        let mut f = FormField::zero(form.degree());
        for (mi, c) in form.terms() {
            f.add_term(mi, Expr::Const(c.clone()));
        }
        f
    }

    /// Field from `(coefficient, 1-based indices)` pairs; indices are
    /// sorted with the permutation sign folded into the coefficient.
    pub fn from_terms(degree: usize, terms: Vec<(Expr, Vec<usize>)>) -> Self {
        let mut f = FormField::zero(degree);
        for (c, idx) in terms {
            assert_eq!(idx.len(), degree, "term degree");
            assert!(idx.iter().all(|i| (1..=CHART_DIM).contains(i)), "index out of range");
            if let Some((mi, sign)) = MultiIndex::from_indices(&idx) {
                f.add_term(mi, if sign < 0 { expr::neg(c) } else { c });
            }
        }
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, &Expr)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, indices: &[usize]) -> Expr {
        match MultiIndex::from_indices(indices) {
            Some((mi, sign)) => {
                let c = self.terms.get(&mi).cloned().unwrap_or_else(Expr::zero);
                if sign < 0 {
                    expr::neg(c)
                } else {
                    c
                }
            }
            None => Expr::zero(),
        }
    }

    /// Zero after syntactic cancellation.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.values().all(Expr::is_const)
    }

    pub fn add_term(&mut self, mi: MultiIndex, c: Expr) {
        debug_assert_eq!(mi.len(), self.degree);
        let sum = match self.terms.remove(&mi) {
            Some(existing) => expr::add(vec![existing, c]),
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(mi, sum);
        }
    }

    pub fn parse(text: &str) -> Result<Self, FormlangError> {
        parser::parse_field(text)
    }

    pub fn eval_float(&self, x: &[f64; 6]) -> Result<KForm<f64>, DomainError> {
        let mut out = KForm::zero(CHART_DIM, self.degree);
        for (mi, c) in &self.terms {
            out.add_term(*mi, c.eval(x)?);
        }
        Ok(out)
    }

    /// `Ok(None)` when some coefficient is not rational at `x`.
    pub fn eval_exact(&self, x: &[PiRational; 6]) -> Result<Option<KForm<Rational>>, DomainError> {
        let mut out = KForm::zero(CHART_DIM, self.degree);
        let mut exact = true;
        for (mi, c) in &self.terms {
            // keep evaluating so that domain errors surface either way
            match c.eval_exact(x)? {
                Some(v) => match v.as_rational() {
                    Some(q) => out.add_term(*mi, q.clone()),
                    None => exact = false,
                },
                None => exact = false,
            }
        }
        Ok(exact.then_some(out))
    }

    /// Exact when possible, floating point otherwise.
    pub fn eval(&self, p: &Point) -> Result<FieldValue, DomainError> {
        if let Point::Exact(x) = p {
            if let Some(k) = self.eval_exact(x)? {
                return Ok(FieldValue::Exact(k));
            }
        }
        Ok(FieldValue::Float(self.eval_float(&p.to_float())?))
    }

    /// `d(c·dx_I) = Σᵢ ∂ᵢc · dxᵢ∧dx_I`.
    pub fn exterior_derivative(&self) -> FormField {
        assert!(self.degree < CHART_DIM, "d of a top-degree form");
        let mut out = FormField::zero(self.degree + 1);
        for (mi, c) in &self.terms {
            for i in 0..CHART_DIM {
                if mi.contains(i) || !c.depends_on(i) {
                    continue;
                }
                let di = MultiIndex::from_mask(1 << i);
                let sign = di.wedge_sign(*mi).expect("disjoint");
                let dc = c.diff(i);
                out.add_term(di.union(*mi), if sign < 0 { expr::neg(dc) } else { dc });
            }
        }
        out
    }

    /// Pointwise pullback by a matrix of expressions: at each point the
    /// value is `pullback(P(x), F(x))`. `p[r][c]` is row `r`, column `c`.
    pub fn pointwise_pullback(&self, p: &[Vec<Expr>]) -> FormField {
        assert!(p.len() == CHART_DIM && p.iter().all(|r| r.len() == CHART_DIM), "6x6 matrix expected");
        let mut out = FormField::zero(self.degree);
        for target in basis_indices(CHART_DIM, self.degree) {
            let cols: Vec<usize> = target.positions().collect();
            let mut terms = Vec::new();
            for (mi, c) in &self.terms {
                let rows: Vec<usize> = mi.positions().collect();
                let minor = expr_det(&rows.iter().map(|&r| cols.iter().map(|&k| p[r][k].clone()).collect()).collect::<Vec<Vec<Expr>>>());
                if !minor.is_zero() {
                    terms.push(expr::mul(vec![c.clone(), minor]));
                }
            }
            out.add_term(target, expr::add(terms));
        }
        out
    }

    /// Partial derivative of every coefficient with respect to `x_{i+1}`.
    pub fn partial(&self, i: usize) -> FormField {
        let mut out = FormField::zero(self.degree);
        for (mi, c) in &self.terms {
            out.add_term(*mi, c.diff(i));
        }
        out
    }
}

/// Leibniz expansion of a small determinant.
fn expr_det(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 0 {
        return Expr::one();
    }
    let mut terms = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permutations(&mut perm, 0, &mut |p| {
        let factors: Vec<Expr> = (0..n).map(|r| m[r][p[r]].clone()).collect();
        if factors.iter().any(Expr::is_zero) {
            return;
        }
        let term = expr::mul(factors);
        let sign = MultiIndex::from_indices(&p.iter().map(|k| k + 1).collect::<Vec<_>>()).expect("permutation").1;
        terms.push(if sign < 0 { expr::neg(term) } else { term });
    });
    expr::add(terms)
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

impl fmt::Display for FormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let basis = |mi: MultiIndex| mi.indices().iter().map(|i| format!("dx{i}")).collect::<Vec<_>>().join("^");
        if self.terms.is_empty() {
            let mi = MultiIndex::from_mask(((1u32 << self.degree) - 1) as u16);
            return write!(f, "0*{}", basis(mi));
        }
        for (k, (mi, c)) in self.terms.iter().enumerate() {
            let negative = c.has_negative_sign();
            let shown = if negative { expr::neg(c.clone()) } else { c.clone() };
            match (k == 0, negative) {
                (true, true) => f.write_str("-")?,
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
                (true, false) => {}
            }
            if shown == Expr::one() {
                f.write_str(&basis(*mi))?;
            } else {
                write!(f, "{}*{}", shown.display_at(1), basis(*mi))?;
            }
        }
        Ok(())
    }
}

impl FromStr for FormField {
    type Err = FormlangError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FormField::parse(s)
    }
}

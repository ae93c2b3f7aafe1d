//! Exterior algebra on `R^6` and `R^7`.
//!
//! A [`KForm`] is a sparse table of coefficients over strictly increasing
//! multi-indices. Multi-indices are written 1-based, as in `α₁₂₃`
//! (`&[1, 2, 3]`); vector components and matrix entries are 0-based.
//!
//! Sign conventions:
//!
//! * `α_I ∧ α_J` is reordered into sorted order and picks up the parity of
//!   the permutation (number of inversions).
//! * `ι_v(α¹∧…∧αᵏ) = Σᵢ (−1)^{i−1} αⁱ(v) · (α¹∧…α̂ⁱ…∧αᵏ)`, so for a basis
//!   vector `e_j` at position `p` (1-based) of a sorted tuple the sign is
//!   `(−1)^{p−1}`. Every downstream sign (the Q-operator, `λ`, `J`) depends
//!   on this choice.

mod json;

use std::collections::BTreeMap;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

pub use json::{FormJson, TermJson};

use crate::linalg::{Matrix, Vector};
use crate::scalar::{ParseScalarError, Rational, Scalar};

pub const MAX_DIM: usize = 7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExteriorError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unsupported dimension {0} (expected 1..=7)")]
    UnsupportedDimension(usize),
    #[error("degree {degree} exceeds dimension {dim}")]
    DegreeTooLarge { degree: usize, dim: usize },
    #[error("index {index} outside 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("term has {got} indices, form has degree {expected}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("shape mismatch: map is {rows}x{cols}, form dimension is {dim}")]
    ShapeMismatch { rows: usize, cols: usize, dim: usize },
    #[error("volume form is zero")]
    ZeroVolume,
    #[error("expected a form of degree {expected}, got {got}")]
    WrongDegree { expected: usize, got: usize },
    #[error(transparent)]
    Coefficient(#[from] ParseScalarError),
    #[error("malformed form JSON: {0}")]
    Json(String),
}

/// A strictly increasing multi-index, stored as a bit set over `0..dim`.
/// Ordered lexicographically on the index sequence.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex(u16);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    /// From 1-based indices. Returns `None` for repeated indices; the sign
    /// of the sorting permutation is returned alongside.
    pub fn from_indices(indices: &[usize]) -> Option<(MultiIndex, i8)> {
        let mut mask = 0u16;
        let mut inversions = 0usize;
        for (pos, &i) in indices.iter().enumerate() {
            debug_assert!(i >= 1 && i <= 16);
            let bit = 1u16 << (i - 1);
            if mask & bit != 0 {
                return None;
            }
            mask |= bit;
            inversions += indices[..pos].iter().filter(|&&j| j > i).count();
        }
        Some((MultiIndex(mask), if inversions % 2 == 0 { 1 } else { -1 }))
    }

    pub fn from_mask(mask: u16) -> Self {
        MultiIndex(mask)
    }

    pub fn mask(self) -> u16 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// 0-based positions in increasing order.
    pub fn positions(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..16).filter(move |b| mask & (1 << b) != 0)
    }

    /// 1-based indices in increasing order.
    pub fn indices(self) -> Vec<usize> {
        self.positions().map(|p| p + 1).collect()
    }

    pub fn contains(self, pos: usize) -> bool {
        self.0 & (1 << pos) != 0
    }

    /// Sign of `α_self ∧ α_other` relative to the sorted union, or `None` if
    /// the two share an index.
    pub fn wedge_sign(self, other: MultiIndex) -> Option<i8> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let swaps: u32 = other.positions().map(|j| (self.0 >> (j + 1)).count_ones()).sum();
        Some(if swaps % 2 == 0 { 1 } else { -1 })
    }

    /// Sign `(−1)^{p−1}` of contracting the basis vector at position `pos`,
    /// where `p` is its 1-based rank inside the tuple.
    pub fn interior_sign(self, pos: usize) -> i8 {
        let below = (self.0 & ((1u16 << pos) - 1)).count_ones();
        if below % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn union(self, other: MultiIndex) -> MultiIndex {
        MultiIndex(self.0 | other.0)
    }

    pub fn without(self, pos: usize) -> MultiIndex {
        MultiIndex(self.0 & !(1 << pos))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.positions().cmp(other.positions())
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.indices())
    }
}

/// All multi-indices of length `degree` over `1..=dim`, lexicographic.
pub fn basis_indices(dim: usize, degree: usize) -> Vec<MultiIndex> {
    let mut out: Vec<MultiIndex> = (0u16..(1 << dim))
        .filter(|m| m.count_ones() as usize == degree)
        .map(MultiIndex)
        .collect();
    out.sort();
    out
}

/// A degree-`k` alternating form on `R^dim`.
#[derive(Clone, PartialEq)]
pub struct KForm<S> {
    dim: usize,
    degree: usize,
    coeffs: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> KForm<S> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        assert!(degree <= dim, "degree {degree} exceeds dimension {dim}");
        KForm { dim, degree, coeffs: BTreeMap::new() }
    }

    /// Checked constructor from `(indices, coefficient)` pairs. Indices are
    /// 1-based and may be unsorted; repeated indices drop the term.
    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<Self, ExteriorError>
    where
        I: IntoIterator<Item = (Vec<usize>, S)>,
    {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(ExteriorError::UnsupportedDimension(dim));
        }
        if degree > dim {
            return Err(ExteriorError::DegreeTooLarge { degree, dim });
        }
        let mut form = KForm::zero(dim, degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(ExteriorError::DegreeMismatch { expected: degree, got: idx.len() });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i == 0 || i > dim) {
                return Err(ExteriorError::IndexOutOfRange { index: bad, dim });
            }
            if let Some((mi, sign)) = MultiIndex::from_indices(&idx) {
                form.add_term(mi, if sign > 0 { c } else { -c });
            }
        }
        Ok(form)
    }

    /// Sum of `±α_I` with integer coefficients; panics on malformed input.
    /// Intended for literals in code and tests.
    pub fn from_int_terms(dim: usize, terms: &[(i64, &[usize])]) -> Self {
        let degree = terms.first().map_or(0, |t| t.1.len());
        Self::from_terms(dim, degree, terms.iter().map(|(c, idx)| (idx.to_vec(), S::from_i64(*c))))
            .expect("malformed literal form")
    }

    /// The basis form `α_I` (1-based, sorted or not).
    pub fn basis(dim: usize, indices: &[usize]) -> Self {
        Self::from_int_terms(dim, &[(1, indices)])
    }

    /// `α₁∧…∧α_dim`.
    pub fn volume(dim: usize) -> Self {
        let all: Vec<usize> = (1..=dim).collect();
        Self::basis(dim, &all)
    }

    /// A 0-form (scalar) in dimension `dim`.
    pub fn constant(dim: usize, c: S) -> Self {
        let mut f = KForm::zero(dim, 0);
        f.add_term(MultiIndex::EMPTY, c);
        f
    }

    /// A 1-form from its components.
    pub fn one_form(components: &[S]) -> Self {
        let dim = components.len();
        let mut f = KForm::zero(dim, 1);
        for (p, c) in components.iter().enumerate() {
            f.add_term(MultiIndex(1 << p), c.clone());
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Nonzero coefficients in lexicographic index order.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, &S)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, indices: &[usize]) -> S {
        match MultiIndex::from_indices(indices) {
            Some((mi, sign)) => {
                let c = self.coeffs.get(&mi).cloned().unwrap_or_else(S::zero);
                if sign > 0 {
                    c
                } else {
                    -c
                }
            }
            None => S::zero(),
        }
    }

    pub fn coeff_at(&self, mi: MultiIndex) -> S {
        self.coeffs.get(&mi).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.coeffs.values().all(|c| c.is_negligible(tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// Accumulate `c·α_I`, dropping exact zeros.
    pub fn add_term(&mut self, mi: MultiIndex, c: S) {
        debug_assert_eq!(mi.len(), self.degree);
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&mi) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.coeffs.remove(&mi);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.coeffs.insert(mi, c);
            }
        }
    }

    pub fn scaled(&self, s: &S) -> Self {
        let mut out = KForm::zero(self.dim, self.degree);
        for (k, v) in &self.coeffs {
            out.add_term(*k, v.clone() * s.clone());
        }
        out
    }

    /// Coefficients in the lexicographic basis of `Λ^degree`.
    pub fn to_coords(&self) -> Vec<S> {
        basis_indices(self.dim, self.degree).into_iter().map(|mi| self.coeff_at(mi)).collect()
    }

    pub fn from_coords(dim: usize, degree: usize, coords: &[S]) -> Self {
        let basis = basis_indices(dim, degree);
        assert_eq!(basis.len(), coords.len(), "coordinate vector has wrong length");
        let mut out = KForm::zero(dim, degree);
        for (mi, c) in basis.into_iter().zip(coords) {
            out.add_term(mi, c.clone());
        }
        out
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> KForm<T> {
        let mut out = KForm::zero(self.dim, self.degree);
        for (k, v) in &self.coeffs {
            out.add_term(*k, f(v));
        }
        out
    }

    pub fn to_float(&self) -> KForm<f64> {
        self.map_scalars(Scalar::to_f64)
    }

    /// Exterior product.
    pub fn wedge(&self, other: &KForm<S>) -> Result<KForm<S>, ExteriorError> {
        if self.dim != other.dim {
            return Err(ExteriorError::DimensionMismatch(self.dim, other.dim));
        }
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(ExteriorError::DegreeTooLarge { degree, dim: self.dim });
        }
        let mut out = KForm::zero(self.dim, degree);
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                if let Some(sign) = a.wedge_sign(*b) {
                    let p = x.clone() * y.clone();
                    out.add_term(a.union(*b), if sign > 0 { p } else { -p });
                }
            }
        }
        Ok(out)
    }

    /// Interior product `ι_v`, contracting the first slot.
    pub fn interior(&self, v: &Vector<S>) -> Result<KForm<S>, ExteriorError> {
        if v.dim() != self.dim {
            return Err(ExteriorError::DimensionMismatch(v.dim(), self.dim));
        }
        if self.degree == 0 {
            return Err(ExteriorError::WrongDegree { expected: 1, got: 0 });
        }
        let mut out = KForm::zero(self.dim, self.degree - 1);
        for (mi, c) in &self.coeffs {
            for pos in mi.positions() {
                let vj = &v[pos];
                if vj.is_zero() {
                    continue;
                }
                let p = vj.clone() * c.clone();
                out.add_term(mi.without(pos), if mi.interior_sign(pos) > 0 { p } else { -p });
            }
        }
        Ok(out)
    }

    /// `ι_{e_pos}` for the standard basis vector at 0-based position `pos`.
    pub fn interior_basis(&self, pos: usize) -> KForm<S> {
        assert!(pos < self.dim && self.degree > 0);
        let mut out = KForm::zero(self.dim, self.degree - 1);
        for (mi, c) in &self.coeffs {
            if mi.contains(pos) {
                let c = c.clone();
                out.add_term(mi.without(pos), if mi.interior_sign(pos) > 0 { c } else { -c });
            }
        }
        out
    }

    /// Multilinear evaluation `a(v₁,…,v_k)`.
    pub fn eval(&self, vectors: &[&Vector<S>]) -> Result<S, ExteriorError> {
        if vectors.len() != self.degree {
            return Err(ExteriorError::Arity { expected: self.degree, got: vectors.len() });
        }
        let mut acc = self.clone();
        for v in vectors {
            acc = acc.interior(v)?;
        }
        Ok(acc.coeff_at(MultiIndex::EMPTY))
    }

    /// Evaluation on standard basis vectors given by 0-based positions.
    /// Repeated positions give zero.
    pub fn eval_basis(&self, positions: &[usize]) -> S {
        let idx: Vec<usize> = positions.iter().map(|p| p + 1).collect();
        self.coeff(&idx)
    }

    /// Pullback along a linear map `P: R^m → R^dim`, given as a `dim × m`
    /// matrix: `(P*a)(v₁,…) = a(Pv₁,…)`.
    pub fn pullback(&self, p: &Matrix<S>) -> Result<KForm<S>, ExteriorError> {
        if p.rows() != self.dim {
            return Err(ExteriorError::ShapeMismatch { rows: p.rows(), cols: p.cols(), dim: self.dim });
        }
        let src = p.cols();
        if !(1..=MAX_DIM).contains(&src) {
            return Err(ExteriorError::UnsupportedDimension(src));
        }
        if self.degree > src {
            return Err(ExteriorError::DegreeTooLarge { degree: self.degree, dim: src });
        }
        // P*α_i is row i of P.
        let rows: Vec<KForm<S>> = (0..self.dim).map(|i| KForm::one_form(p.row(i))).collect();
        let mut out = KForm::zero(src, self.degree);
        'terms: for (mi, c) in &self.coeffs {
            let mut term = KForm::constant(src, c.clone());
            for pos in mi.positions() {
                term = term.wedge(&rows[pos])?;
                if term.is_zero() {
                    continue 'terms;
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// The unique vector `v` with `ι_v θ = self` for a 5-form on `R^6`
    /// and a nonzero volume form `θ`.
    pub fn dualize_five(&self, theta: &KForm<S>) -> Result<Vector<S>, ExteriorError> {
        if self.dim != 6 || theta.dim != 6 {
            return Err(ExteriorError::DimensionMismatch(self.dim, theta.dim));
        }
        if self.degree != 5 {
            return Err(ExteriorError::WrongDegree { expected: 5, got: self.degree });
        }
        if theta.degree != 6 {
            return Err(ExteriorError::WrongDegree { expected: 6, got: theta.degree });
        }
        let full = MultiIndex((1 << 6) - 1);
        let t = theta.coeff_at(full);
        if t.is_zero() {
            return Err(ExteriorError::ZeroVolume);
        }
        // ι_{e_j} α_{123456} = (−1)^j α_{all∖j}  (j 0-based)
        let mut v = Vector::zeros(6);
        for (j, slot) in v.0.iter_mut().enumerate() {
            let c = self.coeff_at(full.without(j));
            if c.is_zero() {
                continue;
            }
            let c = c / t.clone();
            *slot = if j % 2 == 0 { c } else { -c };
        }
        Ok(v)
    }
}

impl KForm<Rational> {
    pub fn from_int_coords(dim: usize, degree: usize, coords: &[i64]) -> Self {
        let c: Vec<Rational> = coords.iter().map(|&x| Rational::from_i64(x)).collect();
        KForm::from_coords(dim, degree, &c)
    }
}

impl<S: Scalar> Add for &KForm<S> {
    type Output = KForm<S>;
    fn add(self, rhs: &KForm<S>) -> KForm<S> {
        assert_eq!((self.dim, self.degree), (rhs.dim, rhs.degree), "adding forms of different shape");
        let mut out = self.clone();
        for (k, v) in &rhs.coeffs {
            out.add_term(*k, v.clone());
        }
        out
    }
}

impl<S: Scalar> Sub for &KForm<S> {
    type Output = KForm<S>;
    fn sub(self, rhs: &KForm<S>) -> KForm<S> {
        assert_eq!((self.dim, self.degree), (rhs.dim, rhs.degree), "subtracting forms of different shape");
        let mut out = self.clone();
        for (k, v) in &rhs.coeffs {
            out.add_term(*k, -v.clone());
        }
        out
    }
}

impl<S: Scalar> Neg for &KForm<S> {
    type Output = KForm<S>;
    fn neg(self) -> KForm<S> {
        self.map_scalars(|c| -c.clone())
    }
}

impl<S: Scalar> fmt::Display for KForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (n, (mi, c)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            let basis: Vec<String> = mi.indices().iter().map(|i| format!("dx{i}")).collect();
            if basis.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{}", basis.join("^"))?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for KForm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KForm(dim={}, degree={}, {})", self.dim, self.degree, self)
    }
}

/// The standard representatives of the three orbits and the canonical
/// type-2 expression.
pub mod standard {
    use super::KForm;
    use crate::scalar::Scalar;

    /// `α₁₂₃ + α₄₅₆` (type 1).
    pub fn omega1<S: Scalar>() -> KForm<S> {
        KForm::from_int_terms(6, &[(1, &[1, 2, 3]), (1, &[4, 5, 6])])
    }

    /// `α₁₂₃ + α₁₄₅ + α₂₄₆ − α₃₅₆` (type 2).
    pub fn omega2<S: Scalar>() -> KForm<S> {
        KForm::from_int_terms(6, &[(1, &[1, 2, 3]), (1, &[1, 4, 5]), (1, &[2, 4, 6]), (-1, &[3, 5, 6])])
    }

    /// `α₁₄₅ + α₂₄₆ + α₃₅₆` (type 3).
    pub fn omega3<S: Scalar>() -> KForm<S> {
        KForm::from_int_terms(6, &[(1, &[1, 4, 5]), (1, &[2, 4, 6]), (1, &[3, 5, 6])])
    }

    /// `Re(dz¹∧dz²∧dz³)` with `z^k = x^k + i x^{k+3}`:
    /// `α₁₂₃ − α₁₅₆ + α₂₄₆ − α₃₄₅`.
    pub fn omega_normal<S: Scalar>() -> KForm<S> {
        KForm::from_int_terms(6, &[(1, &[1, 2, 3]), (-1, &[1, 5, 6]), (1, &[2, 4, 6]), (-1, &[3, 4, 5])])
    }

    /// `Im(dz¹∧dz²∧dz³)`: `α₁₂₆ − α₁₃₅ + α₂₃₄ − α₄₅₆`.
    pub fn omega_normal_imaginary<S: Scalar>() -> KForm<S> {
        KForm::from_int_terms(6, &[(1, &[1, 2, 6]), (-1, &[1, 3, 5]), (1, &[2, 3, 4]), (-1, &[4, 5, 6])])
    }

    /// `α₁₂₃₄₅₆`.
    pub fn theta<S: Scalar>() -> KForm<S> {
        KForm::volume(6)
    }
}

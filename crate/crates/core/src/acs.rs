//! Complex structures attached to type-2 forms.
//!
//! For a type-2 form `ω` the operator `Q` squares to `λ·I` with `λ < 0`, and
//! `J± = ±Q/√(−λ)` are the two complex structures for which `ω` is pure:
//! `ω(Jv₁,v₂,v₃) = ω(v₁,Jv₂,v₃) = ω(v₁,v₂,Jv₃)`. From `(ω, J)` we build the
//! (3,0)-form `γ = ω − i·ω(J·,·,·)`, a change of basis bringing `ω` to
//! `Re(dz¹∧dz²∧dz³)`, and the operator `−½(A_J + D_J)` on `Λ³`.

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::classify::{self, matrix_columns_json, ClassifyError, Endo, TypeLabel};
use crate::exterior::{basis_indices, standard, ExteriorError, KForm};
use crate::linalg::{Matrix, Vector};
use crate::scalar::{Scalar, Tolerances};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AcsError {
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("form is {0}, not type 2")]
    NotTypeTwo(TypeLabel),
    #[error("sqrt(-lambda) is irrational for lambda = {0}; use the float backend")]
    IrrationalNorm(String),
    #[error("form is not pure with respect to J (residual {0:e})")]
    PurityViolated(f64),
    #[error("J does not square to -I (deviation {0:e})")]
    NotComplexStructure(f64),
    #[error("no standard basis vector extends the complex basis")]
    DegenerateBasisSelection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure<S: Scalar> {
    pub j: Endo<S>,
    /// The `λ` the structure was normalized with.
    pub lambda: S,
    pub theta: KForm<S>,
}

/// `(J₊, J₋)` with `J₊ = Q/√(−λ)` and `J₋ = −J₊`.
pub fn complex_structures<S: Scalar>(
    omega: &KForm<S>,
    theta: &KForm<S>,
    tol: &Tolerances,
) -> Result<(ComplexStructure<S>, ComplexStructure<S>), AcsError> {
    let report = classify::classify(omega, Some(theta), tol)?;
    if report.label != TypeLabel::Type2 {
        return Err(AcsError::NotTypeTwo(report.label));
    }
    let norm = (-report.lambda.clone())
        .sqrt()
        .ok_or_else(|| AcsError::IrrationalNorm(report.lambda.to_string()))?;
    let j = report.q.scaled(&(S::one() / norm));
    let minus = -&j;
    Ok((
        ComplexStructure { j, lambda: report.lambda.clone(), theta: theta.clone() },
        ComplexStructure { j: minus, lambda: report.lambda, theta: theta.clone() },
    ))
}

/// `max |J² + I|`.
pub fn square_defect<S: Scalar>(j: &Endo<S>) -> S {
    let sq = &(j * j) + &Matrix::identity(j.rows());
    max_abs(sq.entries().iter().cloned())
}

fn max_abs<S: Scalar>(values: impl Iterator<Item = S>) -> S {
    values.map(|x| x.abs()).fold(S::zero(), |m, x| if x > m { x } else { m })
}

/// `ω(args)` with `J` applied in `slot`, all arguments standard basis vectors.
fn twisted<S: Scalar>(omega: &KForm<S>, j: &Endo<S>, slot: usize, args: [usize; 3]) -> S {
    let mut acc = S::zero();
    for k in 0..6 {
        let jk = &j[(k, args[slot])];
        if jk.is_zero() {
            continue;
        }
        let mut a = args;
        a[slot] = k;
        acc = acc + jk.clone() * omega.eval_basis(&a);
    }
    acc
}

/// Largest violation of `ω(Jv₁,v₂,v₃) = ω(v₁,Jv₂,v₃) = ω(v₁,v₂,Jv₃)` over
/// all ordered triples of standard basis vectors.
pub fn purity_residual<S: Scalar>(omega: &KForm<S>, j: &Endo<S>) -> S {
    let mut worst = S::zero();
    for a in 0..6 {
        for b in 0..6 {
            for c in 0..6 {
                let args = [a, b, c];
                let first = twisted(omega, j, 0, args);
                let second = twisted(omega, j, 1, args);
                let third = twisted(omega, j, 2, args);
                for d in [(first - second.clone()).abs(), (second - third).abs()] {
                    if d > worst {
                        worst = d;
                    }
                }
            }
        }
    }
    worst
}

/// A complex number over a scalar backend.
#[derive(Debug, Clone, PartialEq)]
pub struct Complex<S> {
    pub re: S,
    pub im: S,
}

impl<S: Scalar> Complex<S> {
    pub fn new(re: S, im: S) -> Self {
        Complex { re, im }
    }

    pub fn zero() -> Self {
        Complex { re: S::zero(), im: S::zero() }
    }

    fn add(self, o: Complex<S>) -> Self {
        Complex { re: self.re + o.re, im: self.im + o.im }
    }

    /// Multiply by `i^k`.
    fn times_i_pow(self, k: usize) -> Self {
        match k % 4 {
            0 => self,
            1 => Complex { re: -self.im, im: self.re },
            2 => Complex { re: -self.re, im: -self.im },
            _ => Complex { re: self.im, im: -self.re },
        }
    }

    pub fn norm_sqr(&self) -> S {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(Complex { re: self.re.clone() / n.clone(), im: -self.im.clone() / n })
    }

    /// `max(|re|, |im|)`.
    pub fn max_abs(&self) -> S {
        let (a, b) = (self.re.abs(), self.im.abs());
        if a > b {
            a
        } else {
            b
        }
    }
}

/// A complex vector `re + i·im` in `V ⊗ C`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector<S> {
    pub re: Vector<S>,
    pub im: Vector<S>,
}

impl<S: Scalar> ComplexVector<S> {
    pub fn real(v: Vector<S>) -> Self {
        let n = v.dim();
        ComplexVector { re: v, im: Vector::zeros(n) }
    }
}

/// A complex 3-form on `V ⊗ C`, stored through its restrictions to real
/// arguments: `γ(v₁,v₂,v₃) = re(v₁,v₂,v₃) + i·im(v₁,v₂,v₃)` for real `vₖ`,
/// extended complex-trilinearly.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexThreeForm<S: Scalar> {
    pub re: KForm<S>,
    pub im: KForm<S>,
    pub j: Endo<S>,
}

impl<S: Scalar> ComplexThreeForm<S> {
    pub fn eval_real(&self, v1: &Vector<S>, v2: &Vector<S>, v3: &Vector<S>) -> Result<Complex<S>, ExteriorError> {
        Ok(Complex::new(self.re.eval(&[v1, v2, v3])?, self.im.eval(&[v1, v2, v3])?))
    }

    /// Complex-trilinear evaluation.
    pub fn eval(&self, w: [&ComplexVector<S>; 3]) -> Result<Complex<S>, ExteriorError> {
        let mut total = Complex::zero();
        for choice in 0..8usize {
            let pick = |k: usize| if choice >> k & 1 == 1 { &w[k].im } else { &w[k].re };
            let (a, b, c) = (pick(0), pick(1), pick(2));
            if a.is_negligible(0.0) || b.is_negligible(0.0) || c.is_negligible(0.0) {
                continue;
            }
            let value = self.eval_real(a, b, c)?;
            total = total.add(value.times_i_pow(choice.count_ones() as usize));
        }
        Ok(total)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "re": serde_json::to_value(self.re.to_json()).expect("form serializes"),
            "im": serde_json::to_value(self.im.to_json()).expect("form serializes"),
            "J": matrix_columns_json(&self.j),
        })
    }
}

/// The (3,0)-form with real part `ω`: `im(v₁,v₂,v₃) = −ω(Jv₁,v₂,v₃)`.
pub fn make_gamma<S: Scalar>(
    omega: &KForm<S>,
    j: &Endo<S>,
    tol: &Tolerances,
) -> Result<ComplexThreeForm<S>, AcsError> {
    classify::check_three_form(omega)?;
    let residual = purity_residual(omega, j);
    let scale = omega.max_abs() * j.max_abs();
    if !residual.is_negligible(tol.residual * scale) {
        return Err(AcsError::PurityViolated(residual.to_f64()));
    }
    let mut im = KForm::zero(6, 3);
    for mi in basis_indices(6, 3) {
        let p: Vec<usize> = mi.positions().collect();
        im.add_term(mi, -twisted(omega, j, 0, [p[0], p[1], p[2]]));
    }
    Ok(ComplexThreeForm { re: omega.clone(), im, j: j.clone() })
}

/// Largest `|γ(b + iJb, v₂, v₃)|` (as `max(|Re|, |Im|)`) over standard basis
/// vectors `b` and pairs `v₂ < v₃`. Zero exactly for (3,0)-forms.
pub fn three_zero_residual<S: Scalar>(gamma: &ComplexThreeForm<S>) -> S {
    let mut worst = S::zero();
    for b in 0..6 {
        let e = Vector::unit(6, b);
        let anti = ComplexVector { im: gamma.j.mul_vec(&e), re: e };
        for v2 in 0..6 {
            for v3 in v2 + 1..6 {
                let w2 = ComplexVector::real(Vector::unit(6, v2));
                let w3 = ComplexVector::real(Vector::unit(6, v3));
                let value = gamma.eval([&anti, &w2, &w3]).expect("dimensions agree");
                let m = value.max_abs();
                if m > worst {
                    worst = m;
                }
            }
        }
    }
    worst
}

/// A change of basis bringing a type-2 form to the canonical expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeOfBasis<S: Scalar> {
    /// Columns `(b₁, b₂, b₃, Jb₁, Jb₂, Jb₃)`; `pullback(p, ω) = ω_N`.
    pub p: Matrix<S>,
    /// `p⁻¹`, so that `ω = pullback(p_inverse, ω_N)`.
    pub p_inverse: Matrix<S>,
    /// `γ(b₁, b₂, b₃)` before rescaling `b₁`.
    pub c: Complex<S>,
    /// `max |pullback(p, ω) − ω_N|`.
    pub residual: S,
    pub j: Endo<S>,
}

impl<S: Scalar> ChangeOfBasis<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "P": matrix_columns_json(&self.p),
            "P_inverse": matrix_columns_json(&self.p_inverse),
            "c": [self.c.re.to_coef_string(), self.c.im.to_coef_string()],
            "residual": self.residual.to_coef_string(),
            "J": matrix_columns_json(&self.j),
            "convention": "pullback(P, omega) = Re(dz1^dz2^dz3), z_k = x_k + i x_{k+3}; columns of P are b1,b2,b3,Jb1,Jb2,Jb3",
        })
    }
}

fn first_extending<S: Scalar>(spanning: &[Vector<S>], tol: f64) -> Option<Vector<S>> {
    (0..6).map(|k| Vector::unit(6, k)).find(|e| {
        let mut cols = spanning.to_vec();
        cols.push(e.clone());
        Matrix::from_columns(&cols).rank(tol) == cols.len()
    })
}

/// Canonical coordinates: `P` with `pullback(P, ω) = α₁₂₃ − α₁₅₆ + α₂₄₆ − α₃₄₅`.
pub fn normalize<S: Scalar>(
    omega: &KForm<S>,
    theta: &KForm<S>,
    tol: &Tolerances,
) -> Result<ChangeOfBasis<S>, AcsError> {
    let (plus, _) = complex_structures(omega, theta, tol)?;
    let j = plus.j;
    let pivot = tol.pivot;
    let b1 = Vector::unit(6, 0);
    let jb1 = j.mul_vec(&b1);
    let b2 = first_extending(&[b1.clone(), jb1.clone()], pivot).ok_or(AcsError::DegenerateBasisSelection)?;
    let jb2 = j.mul_vec(&b2);
    let b3 = first_extending(&[b1.clone(), jb1.clone(), b2.clone(), jb2.clone()], pivot)
        .ok_or(AcsError::DegenerateBasisSelection)?;
    let jb3 = j.mul_vec(&b3);

    let c = Complex::new(omega.eval(&[&b1, &b2, &b3])?, -omega.eval(&[&jb1, &b2, &b3])?);
    let mu = c.inverse().ok_or(AcsError::DegenerateBasisSelection)?;
    let b1 = &b1.scaled(&mu.re) + &jb1.scaled(&mu.im);
    let jb1 = j.mul_vec(&b1);

    let p = Matrix::from_columns(&[b1, b2, b3, jb1, jb2, jb3]);
    let p_inverse = p.inverse(pivot).ok_or(AcsError::DegenerateBasisSelection)?;
    let diff = &omega.pullback(&p)? - &standard::omega_normal();
    let residual = max_abs(diff.terms().map(|(_, c)| c.clone()));
    Ok(ChangeOfBasis { p, p_inverse, c, residual, j })
}

fn check_complex_structure<S: Scalar>(j: &Endo<S>, tol: &Tolerances) -> Result<(), AcsError> {
    let defect = square_defect(j);
    if !defect.is_negligible(tol.residual * j.max_abs().powi(2).max(1.0)) {
        return Err(AcsError::NotComplexStructure(defect.to_f64()));
    }
    Ok(())
}

/// `(A_J Ω)(v₁,…,v_k) = Ω(Jv₁,…,Jv_k)`.
pub fn a_operator<S: Scalar>(j: &Endo<S>, form: &KForm<S>) -> Result<KForm<S>, ExteriorError> {
    form.pullback(j)
}

/// `(D_J Ω)(v₁,…,v_k) = Σᵢ Ω(v₁,…,Jvᵢ,…,v_k)`.
pub fn d_operator<S: Scalar>(j: &Endo<S>, form: &KForm<S>) -> Result<KForm<S>, ExteriorError> {
    let (dim, degree) = (form.dim(), form.degree());
    if j.rows() != dim || j.cols() != dim {
        return Err(ExteriorError::ShapeMismatch { rows: j.rows(), cols: j.cols(), dim });
    }
    let mut out = KForm::zero(dim, degree);
    for mi in basis_indices(dim, degree) {
        let args: Vec<Vector<S>> = mi.positions().map(|p| Vector::unit(dim, p)).collect();
        let mut total = S::zero();
        for slot in 0..degree {
            let mut twisted_args = args.clone();
            twisted_args[slot] = j.column(mi.positions().nth(slot).expect("slot in range"));
            let refs: Vec<&Vector<S>> = twisted_args.iter().collect();
            total = total + form.eval(&refs)?;
        }
        out.add_term(mi, total);
    }
    Ok(out)
}

/// The 20×20 matrix of `−½(A_J + D_J)` on `Λ³(R^6)*` in the lexicographic
/// basis; column `n` is the image of the `n`-th basis 3-form.
pub fn hitchin_operator<S: Scalar>(j: &Endo<S>, tol: &Tolerances) -> Result<Matrix<S>, AcsError> {
    if j.rows() != 6 || j.cols() != 6 {
        return Err(AcsError::NotComplexStructure(f64::NAN));
    }
    check_complex_structure(j, tol)?;
    let half = S::one() / S::from_i64(2);
    let columns = basis_indices(6, 3)
        .into_par_iter()
        .map(|mi| {
            let basis = KForm::basis(6, &mi.indices());
            let sum = &a_operator(j, &basis)? + &d_operator(j, &basis)?;
            Ok(Vector(sum.scaled(&-half.clone()).to_coords()))
        })
        .collect::<Result<Vec<_>, ExteriorError>>()?;
    Ok(Matrix::from_columns(&columns))
}

/// Apply a 20×20 operator on `Λ³` to a 3-form.
pub fn apply_on_three_forms<S: Scalar>(h: &Matrix<S>, form: &KForm<S>) -> KForm<S> {
    KForm::from_coords(6, 3, &h.mul_vec(&Vector(form.to_coords())).0)
}

#[cfg(test)]
mod tests;

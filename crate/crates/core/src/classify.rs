//! Orbit classification of 3-forms on `R^6`.
//!
//! For a 3-form `ω` and a volume form `θ`, the operator `Q` is defined by
//! `(ι_v ω) ∧ ω = ι_{Q v} θ`. Its square is always scalar, `Q² = λ·I`, and
//! the sign of `λ = tr(Q²)/6` separates the three multisymplectic orbits:
//! `λ > 0` type 1, `λ < 0` type 2, `λ = 0` type 3. The set
//! `Δ(ω) = {v : (ι_v ω) ∧ (ι_v ω) = 0}` is recovered from `Q`: the two
//! eigenspaces at `±√λ` for type 1, `ker Q` for type 3, `{0}` for type 2.

use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::exterior::{basis_indices, ExteriorError, KForm};
use crate::linalg::{Matrix, Vector};
use crate::scalar::{Backend, Scalar, Tolerances};

/// A linear endomorphism of `R^6`; column `j` is the image of `e_{j+1}`.
pub type Endo<S> = Matrix<S>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("expected a 3-form on R^6, got a {degree}-form on R^{dim}")]
    NotThreeForm { dim: usize, degree: usize },
    #[error("volume form must be a nonzero 6-form on R^6")]
    BadVolume,
    #[error("Q^2 is not scalar: deviation {0:e}")]
    NonScalarSquare(f64),
    #[error("delta basis verification failed: {0}")]
    DeltaVerification(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TypeLabel {
    Type1,
    Type2,
    Type3,
    NotMultisymplectic,
    /// Float backend only: `|λ|` fell inside the band around zero, so the
    /// form is type 3 or numerically degenerate; never silently relabelled.
    Indeterminate,
}

impl fmt::Display for TypeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TypeLabel::Type1 => "Type1",
            TypeLabel::Type2 => "Type2",
            TypeLabel::Type3 => "Type3",
            TypeLabel::NotMultisymplectic => "NotMultisymplectic",
            TypeLabel::Indeterminate => "Indeterminate",
        };
        f.write_str(s)
    }
}

/// Basis of `Δ(ω)` as a union of subspaces.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaBasis<S> {
    /// `Δ = {0}` (type 2) or not computed.
    Trivial,
    /// One 3-dimensional subspace (type 3).
    Subspace(Vec<Vector<S>>),
    /// Two complementary 3-dimensional subspaces (type 1).
    Pair { plus: Vec<Vector<S>>, minus: Vec<Vector<S>> },
    /// Type 1 in the exact backend with irrational `√λ`: eigenvectors are
    /// computed in floating point.
    PairFloat { plus: Vec<Vector<f64>>, minus: Vec<Vector<f64>> },
}

impl<S: Scalar> DeltaBasis<S> {
    pub fn subspaces(&self) -> Vec<Vec<Vec<f64>>> {
        fn conv<T: Scalar>(vs: &[Vector<T>]) -> Vec<Vec<f64>> {
            vs.iter().map(|v| v.0.iter().map(Scalar::to_f64).collect()).collect()
        }
        match self {
            DeltaBasis::Trivial => vec![],
            DeltaBasis::Subspace(b) => vec![conv(b)],
            DeltaBasis::Pair { plus, minus } => vec![conv(plus), conv(minus)],
            DeltaBasis::PairFloat { plus, minus } => vec![conv(plus), conv(minus)],
        }
    }

    fn to_json(&self) -> Value {
        fn conv<T: Scalar>(vs: &[Vector<T>]) -> Value {
            Value::Array(vs.iter().map(|v| vector_json(v)).collect())
        }
        match self {
            DeltaBasis::Trivial => json!([]),
            DeltaBasis::Subspace(b) => json!([conv(b)]),
            DeltaBasis::Pair { plus, minus } => json!([conv(plus), conv(minus)]),
            DeltaBasis::PairFloat { plus, minus } => json!([conv(plus), conv(minus)]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeReport<S: Scalar> {
    pub label: TypeLabel,
    pub lambda: S,
    pub q: Endo<S>,
    pub delta: DeltaBasis<S>,
    pub multisymplectic: bool,
    pub backend: Backend,
    pub theta: KForm<S>,
    pub tolerances: Tolerances,
}

impl<S: Scalar> TypeReport<S> {
    /// JSON report with `Q` listed column by column.
    pub fn to_json(&self) -> Value {
        let cols: Vec<Value> = self.q.columns().iter().map(|c| vector_json(c)).collect();
        let theta = if self.theta == KForm::volume(6) {
            json!("standard")
        } else {
            serde_json::to_value(self.theta.to_json()).expect("form serializes")
        };
        let mut report = json!({
            "type": self.label.to_string(),
            "lambda": self.lambda.to_coef_string(),
            "multisymplectic": self.multisymplectic,
            "Q": cols,
            "delta_basis": self.delta.to_json(),
            "backend": self.backend,
            "theta": theta,
        });
        if S::BACKEND == Backend::Float {
            report["tolerances"] = serde_json::to_value(self.tolerances).expect("tolerances serialize");
        }
        report
    }
}

pub(crate) fn vector_json<S: Scalar>(v: &Vector<S>) -> Value {
    Value::Array(v.0.iter().map(|x| Value::String(x.to_coef_string())).collect())
}

pub(crate) fn matrix_columns_json<S: Scalar>(m: &Matrix<S>) -> Value {
    Value::Array(m.columns().iter().map(|c| vector_json(c)).collect())
}

pub(crate) fn check_three_form<S: Scalar>(omega: &KForm<S>) -> Result<(), ClassifyError> {
    if omega.dim() != 6 || omega.degree() != 3 {
        return Err(ClassifyError::NotThreeForm { dim: omega.dim(), degree: omega.degree() });
    }
    Ok(())
}

fn check_volume<S: Scalar>(theta: &KForm<S>) -> Result<(), ClassifyError> {
    if theta.dim() != 6 || theta.degree() != 6 || theta.is_zero() {
        return Err(ClassifyError::BadVolume);
    }
    Ok(())
}

/// `Q` with `(ι_v ω) ∧ ω = ι_{Q v} θ`; quadratic in `ω`, inversely
/// proportional to `θ`.
pub fn q_operator<S: Scalar>(omega: &KForm<S>, theta: &KForm<S>) -> Result<Endo<S>, ClassifyError> {
    check_three_form(omega)?;
    check_volume(theta)?;
    let columns = (0..6)
        .map(|j| Ok(omega.interior_basis(j).wedge(omega)?.dualize_five(theta)?))
        .collect::<Result<Vec<_>, ClassifyError>>()?;
    Ok(Matrix::from_columns(&columns))
}

/// `λ = tr(Q²)/6`, after checking `Q² = λ·I` (exactly, or to within
/// `tol.residual · ‖Q‖²` in floating point).
pub fn lambda_invariant<S: Scalar>(
    omega: &KForm<S>,
    theta: &KForm<S>,
    tol: &Tolerances,
) -> Result<S, ClassifyError> {
    let q = q_operator(omega, theta)?;
    lambda_from_q(&q, tol)
}

pub(crate) fn lambda_from_q<S: Scalar>(q: &Endo<S>, tol: &Tolerances) -> Result<S, ClassifyError> {
    let q2 = q * q;
    let lambda = q2.trace() / S::from_i64(6);
    let deviation = &q2 - &Matrix::identity(6).scaled(&lambda);
    let scale = q.max_abs().powi(2);
    if !deviation.is_negligible(tol.residual * scale) {
        return Err(ClassifyError::NonScalarSquare(deviation.max_abs()));
    }
    Ok(lambda)
}

/// The 15×6 matrix of `v ↦ ι_v ω` in the lexicographic basis of `Λ²`.
pub fn contraction_matrix<S: Scalar>(omega: &KForm<S>) -> Matrix<S> {
    let basis = basis_indices(omega.dim(), omega.degree() - 1);
    let columns: Vec<Vector<S>> = (0..omega.dim())
        .map(|j| {
            let c = omega.interior_basis(j);
            Vector(basis.iter().map(|mi| c.coeff_at(*mi)).collect())
        })
        .collect();
    Matrix::from_columns(&columns)
}

/// `v ↦ ι_v ω` is injective.
pub fn is_multisymplectic<S: Scalar>(omega: &KForm<S>, tol: &Tolerances) -> bool {
    if omega.degree() == 0 || omega.is_zero() {
        return false;
    }
    let m = contraction_matrix(omega);
    m.rank(tol.pivot * omega.max_abs()) == omega.dim()
}

/// `(ι_v ω) ∧ (ι_v ω)`; zero exactly when `v ∈ Δ(ω)`.
pub fn delta_defect<S: Scalar>(omega: &KForm<S>, v: &Vector<S>) -> Result<KForm<S>, ExteriorError> {
    let c = omega.interior(v)?;
    c.wedge(&c)
}

fn verify_delta<S: Scalar>(omega: &KForm<S>, basis: &[Vector<S>], tol: &Tolerances) -> Result<(), ClassifyError> {
    for v in basis {
        let scale = (omega.max_abs() * v.max_abs()).powi(2);
        let defect = delta_defect(omega, v)?;
        if !defect.is_negligible(tol.residual * scale) {
            return Err(ClassifyError::DeltaVerification(format!(
                "(ι_v ω)∧(ι_v ω) = {defect} for v = {:?}",
                v.0
            )));
        }
    }
    Ok(())
}

fn eigenspace<S: Scalar>(q: &Endo<S>, eigenvalue: &S, tol: &Tolerances) -> Vec<Vector<S>> {
    let shifted = q - &Matrix::identity(6).scaled(eigenvalue);
    shifted.kernel(tol.pivot * q.max_abs().max(f64::MIN_POSITIVE))
}

fn type_one_basis<S: Scalar>(
    omega: &KForm<S>,
    q: &Endo<S>,
    root: &S,
    tol: &Tolerances,
) -> Result<(Vec<Vector<S>>, Vec<Vector<S>>), ClassifyError> {
    let plus = eigenspace(q, root, tol);
    let minus = eigenspace(q, &-root.clone(), tol);
    if plus.len() != 3 || minus.len() != 3 {
        return Err(ClassifyError::DeltaVerification(format!(
            "eigenspaces at ±√λ have dimensions {} and {}",
            plus.len(),
            minus.len()
        )));
    }
    verify_delta(omega, &plus, tol)?;
    verify_delta(omega, &minus, tol)?;
    Ok((plus, minus))
}

/// Width of the float band around zero in which `λ` is treated as undecided.
pub fn lambda_band<S: Scalar>(omega: &KForm<S>, theta: &KForm<S>, tol: &Tolerances) -> f64 {
    let t = theta.max_abs();
    tol.lambda_band * omega.max_abs().powi(4) / (t * t)
}

/// Classify `ω` relative to `θ` (default `α₁₂₃₄₅₆`).
pub fn classify<S: Scalar>(
    omega: &KForm<S>,
    theta: Option<&KForm<S>>,
    tol: &Tolerances,
) -> Result<TypeReport<S>, ClassifyError> {
    check_three_form(omega)?;
    let theta = theta.cloned().unwrap_or_else(|| KForm::volume(6));
    check_volume(&theta)?;
    let q = q_operator(omega, &theta)?;
    let lambda = lambda_from_q(&q, tol)?;
    let multisymplectic = is_multisymplectic(omega, tol);
    let mut report = TypeReport {
        label: TypeLabel::NotMultisymplectic,
        lambda,
        q,
        delta: DeltaBasis::Trivial,
        multisymplectic,
        backend: S::BACKEND,
        theta,
        tolerances: *tol,
    };
    if !multisymplectic {
        return Ok(report);
    }
    let band = if S::is_exact() { 0.0 } else { lambda_band(omega, &report.theta, tol) };
    let sign = if S::is_exact() {
        report.lambda.sign(0.0)
    } else if report.lambda.to_f64().abs() < band {
        report.label = TypeLabel::Indeterminate;
        return Ok(report);
    } else {
        report.lambda.sign(0.0)
    };
    match sign {
        -1 => report.label = TypeLabel::Type2,
        0 => {
            let kernel = report.q.kernel(tol.pivot * report.q.max_abs());
            if kernel.len() != 3 {
                return Err(ClassifyError::DeltaVerification(format!(
                    "ker Q has dimension {} for λ = 0",
                    kernel.len()
                )));
            }
            verify_delta(omega, &kernel, tol)?;
            report.label = TypeLabel::Type3;
            report.delta = DeltaBasis::Subspace(kernel);
        }
        _ => {
            report.label = TypeLabel::Type1;
            report.delta = match report.lambda.sqrt() {
                Some(root) => {
                    let (plus, minus) = type_one_basis(omega, &report.q, &root, tol)?;
                    DeltaBasis::Pair { plus, minus }
                }
                None => {
                    let root = report.lambda.to_f64().sqrt();
                    let (plus, minus) =
                        type_one_basis(&omega.to_float(), &report.q.to_float(), &root, tol)?;
                    DeltaBasis::PairFloat { plus, minus }
                }
            };
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::standard::{omega1, omega2, omega3, omega_normal, theta};
    use crate::scalar::{rat, Rational};

    type Q = Rational;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// `Q e_j` computed from scratch: expand `(ι_{e_j} ω) ∧ ω` term by term
    /// with explicit permutation signs and read off the dual vector.
    fn q_column_oracle(omega: &KForm<Q>, j: usize) -> Vec<Q> {
        fn sort_sign(seq: &[usize]) -> Option<i64> {
            let mut inv = 0;
            for a in 0..seq.len() {
                for b in a + 1..seq.len() {
                    if seq[a] == seq[b] {
                        return None;
                    }
                    if seq[a] > seq[b] {
                        inv += 1;
                    }
                }
            }
            Some(if inv % 2 == 0 { 1 } else { -1 })
        }
        let terms: Vec<(Vec<usize>, Q)> = omega.terms().map(|(m, c)| (m.indices(), c.clone())).collect();
        // five-form coefficients keyed by the missing index
        let mut five = vec![rat(0, 1); 7];
        for (idx, c) in &terms {
            let Some(p) = idx.iter().position(|&i| i == j) else { continue };
            let sign = if p % 2 == 0 { 1 } else { -1 };
            let rest: Vec<usize> = idx.iter().copied().filter(|&i| i != j).collect();
            for (idx2, c2) in &terms {
                let mut seq = rest.clone();
                seq.extend(idx2);
                if let Some(s) = sort_sign(&seq) {
                    let missing = (1..=6).find(|i| !seq.contains(i)).unwrap();
                    five[missing] = five[missing].clone() + Q::from_i64(sign * s) * c.clone() * c2.clone();
                }
            }
        }
        // ι_{e_k} α₁₂₃₄₅₆ = (−1)^{k−1} α_{all∖k}
        (1..=6).map(|k| if k % 2 == 1 { five[k].clone() } else { -five[k].clone() }).collect()
    }

    fn q_oracle(omega: &KForm<Q>) -> Endo<Q> {
        let cols: Vec<Vector<Q>> = (1..=6).map(|j| Vector(q_column_oracle(omega, j))).collect();
        Matrix::from_columns(&cols)
    }

    #[test]
    fn q_matches_independent_oracle() {
        for w in [omega1::<Q>(), omega2(), omega3(), omega_normal()] {
            assert_eq!(q_operator(&w, &theta()).unwrap(), q_oracle(&w));
        }
    }

    #[test]
    fn q_golden_values() {
        let q1 = q_operator(&omega1::<Q>(), &theta()).unwrap();
        assert_eq!(q1, Matrix::diagonal(&[1, 1, 1, -1, -1, -1].map(Q::from_i64)));
        let q2 = q_operator(&omega2::<Q>(), &theta()).unwrap();
        assert_eq!(q2.column(0), Vector::from_i64(&[0, 0, 0, 0, 0, -2]));
        assert_eq!(q2.column(5), Vector::from_i64(&[2, 0, 0, 0, 0, 0]));
        let q3 = q_operator(&omega3::<Q>(), &theta()).unwrap();
        assert_eq!(q3.column(0), Vector::zeros(6));
    }

    #[test]
    fn lambda_golden_values() {
        let t = tol();
        assert_eq!(lambda_invariant(&omega1::<Q>(), &theta(), &t).unwrap(), rat(1, 1));
        assert_eq!(lambda_invariant(&omega2::<Q>(), &theta(), &t).unwrap(), rat(-4, 1));
        assert_eq!(lambda_invariant(&omega3::<Q>(), &theta(), &t).unwrap(), rat(0, 1));
        assert_eq!(lambda_invariant(&omega_normal::<Q>(), &theta(), &t).unwrap(), rat(-4, 1));
    }

    #[test]
    fn q_scaling_laws() {
        let w = omega2::<Q>();
        let q = q_operator(&w, &theta()).unwrap();
        let t = rat(3, 2);
        assert_eq!(q_operator(&w.scaled(&t), &theta()).unwrap(), q.scaled(&(t.clone() * t)));
        let s = rat(-5, 1);
        assert_eq!(q_operator(&w, &theta().scaled(&s)).unwrap(), q.scaled(&rat(-1, 5)));
        let lam = lambda_invariant(&w, &theta().scaled(&s), &tol()).unwrap();
        assert_eq!(lam, rat(-4, 25));
    }

    #[test]
    fn multisymplectic_examples() {
        let t = tol();
        assert!(is_multisymplectic(&omega2::<Q>(), &t));
        assert!(!is_multisymplectic(&KForm::<Q>::basis(6, &[1, 2, 3]), &t));
        assert!(!is_multisymplectic(&KForm::<Q>::zero(6, 3), &t));
    }

    #[test]
    fn classifies_representatives() {
        let t = tol();
        let r1 = classify(&omega1::<Q>(), None, &t).unwrap();
        assert_eq!(r1.label, TypeLabel::Type1);
        let DeltaBasis::Pair { plus, minus } = &r1.delta else { panic!("expected pair") };
        let span = |vs: &[Vector<Q>]| Matrix::from_columns(vs);
        // plus spans e1,e2,e3: rows 4..6 vanish
        let p = span(plus);
        assert_eq!(p.rank(0.0), 3);
        assert!((3..6).all(|i| p.row(i).iter().all(num_traits::Zero::is_zero)));
        let m = span(minus);
        assert!((0..3).all(|i| m.row(i).iter().all(num_traits::Zero::is_zero)));

        let r2 = classify(&omega2::<Q>(), None, &t).unwrap();
        assert_eq!(r2.label, TypeLabel::Type2);
        assert_eq!(r2.lambda, rat(-4, 1));
        assert_eq!(r2.delta, DeltaBasis::Trivial);

        let r3 = classify(&omega3::<Q>(), None, &t).unwrap();
        assert_eq!(r3.label, TypeLabel::Type3);
        let DeltaBasis::Subspace(k) = &r3.delta else { panic!("expected subspace") };
        let km = span(k);
        assert_eq!(km.rank(0.0), 3);
        assert!((3..6).all(|i| km.row(i).iter().all(num_traits::Zero::is_zero)));

        let r = classify(&KForm::<Q>::basis(6, &[1, 2, 3]), None, &t).unwrap();
        assert_eq!(r.label, TypeLabel::NotMultisymplectic);
        assert!(!r.multisymplectic);
    }

    #[test]
    fn irrational_root_switches_to_float_eigenvectors() {
        let r = classify(&omega1::<Q>(), Some(&theta().scaled(&rat(2, 1))), &tol()).unwrap();
        assert_eq!(r.lambda, rat(1, 4));
        assert!(matches!(r.delta, DeltaBasis::Pair { .. }));

        // a sparse ±1 form of type 1 with λ = 5
        let w = KForm::<Q>::from_int_terms(
            6,
            &[(1, &[1, 2, 3]), (-1, &[1, 2, 4]), (-1, &[1, 3, 6]), (-1, &[2, 4, 5]), (-1, &[3, 5, 6]), (-1, &[4, 5, 6])],
        );
        let r = classify(&w, None, &tol()).unwrap();
        assert_eq!(r.label, TypeLabel::Type1);
        assert_eq!(r.lambda, rat(5, 1));
        let DeltaBasis::PairFloat { plus, minus } = &r.delta else { panic!("expected float pair") };
        assert_eq!((plus.len(), minus.len()), (3, 3));
        let wf = w.to_float();
        for v in plus.iter().chain(minus) {
            assert!(delta_defect(&wf, v).unwrap().is_negligible(1e-9));
        }
    }

    #[test]
    fn float_backend_labels() {
        let t = tol();
        assert_eq!(classify(&omega1::<f64>(), None, &t).unwrap().label, TypeLabel::Type1);
        assert_eq!(classify(&omega2::<f64>(), None, &t).unwrap().label, TypeLabel::Type2);
        // type 3 is a measure-zero stratum: float never asserts it
        assert_eq!(classify(&omega3::<f64>(), None, &t).unwrap().label, TypeLabel::Indeterminate);
    }

    #[test]
    fn report_json_shape() {
        let r = classify(&omega2::<Q>(), None, &tol()).unwrap();
        let j = r.to_json();
        assert_eq!(j["type"], "Type2");
        assert_eq!(j["lambda"], "-4");
        assert_eq!(j["multisymplectic"], true);
        assert_eq!(j["backend"], "exact");
        assert_eq!(j["theta"], "standard");
        assert_eq!(j["Q"][0][5], "-2");
        assert_eq!(j["delta_basis"], json!([]));
    }

    #[test]
    fn rejects_wrong_shapes() {
        let err = classify(&KForm::<Q>::basis(6, &[1, 2]), None, &tol()).unwrap_err();
        assert_eq!(err, ClassifyError::NotThreeForm { dim: 6, degree: 2 });
        let err = classify(&omega2::<Q>(), Some(&KForm::zero(6, 6)), &tol()).unwrap_err();
        assert_eq!(err, ClassifyError::BadVolume);
    }

    #[test]
    fn scalar_square_on_random_forms() {
        let mut rng = crate::random::rng(2024);
        for _ in 0..500 {
            let w = crate::random::dense_three_form(&mut rng, 3);
            let q = q_operator(&w, &theta()).unwrap();
            assert_eq!(q, q_oracle(&w));
            let q2 = &q * &q;
            let lambda = q2.trace() / Q::from_i64(6);
            assert_eq!(q2, Matrix::identity(6).scaled(&lambda));
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn type_is_a_gl_invariant(seed in 0u64..u64::MAX) {
            let mut rng = crate::random::rng(seed);
            let w = crate::random::dense_three_form(&mut rng, 2);
            let p = crate::random::invertible_matrix(&mut rng, 6, 2);
            let before = classify(&w, None, &tol()).unwrap();
            let after = classify(&w.pullback(&p).unwrap(), None, &tol()).unwrap();
            proptest::prop_assert_eq!(before.label, after.label);
            let det = p.det();
            proptest::prop_assert_eq!(after.lambda, before.lambda * det.clone() * det);
        }

        #[test]
        fn scaling_keeps_the_type(seed in 0u64..u64::MAX, n in 1i64..5, d in 1i64..5, negative: bool) {
            let mut rng = crate::random::rng(seed);
            let w = crate::random::dense_three_form(&mut rng, 2);
            let t = rat(if negative { -n } else { n }, d);
            let before = classify(&w, None, &tol()).unwrap();
            let after = classify(&w.scaled(&t), None, &tol()).unwrap();
            proptest::prop_assert_eq!(before.label, after.label);
            let t4 = t.clone() * t.clone() * t.clone() * t;
            proptest::prop_assert_eq!(after.lambda, before.lambda * t4);
        }
    }
}

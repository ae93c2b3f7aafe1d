//! The standard `G₂` 3-form on `R^7` and its restrictions to hyperplanes,
//! which are always of type 2.

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::classify::{self, ClassifyError, TypeReport};
use crate::exterior::{ExteriorError, KForm};
use crate::linalg::Matrix;
use crate::random;
use crate::scalar::{Rational, Scalar, Tolerances};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum G2Error {
    #[error("basis has rank {rank}, expected 6")]
    RankDeficientBasis { rank: usize },
    #[error("basis must be a 7x6 matrix, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// `α₁₂₃ + α₁₄₅ − α₁₆₇ + α₂₄₆ + α₂₅₇ + α₃₄₇ − α₃₅₆`.
pub fn standard_form<S: Scalar>() -> KForm<S> {
    KForm::from_int_terms(
        7,
        &[
            (1, &[1, 2, 3]),
            (1, &[1, 4, 5]),
            (-1, &[1, 6, 7]),
            (1, &[2, 4, 6]),
            (1, &[2, 5, 7]),
            (1, &[3, 4, 7]),
            (-1, &[3, 5, 6]),
        ],
    )
}

/// Six vectors of `R^7`, stored as the columns of a 7×6 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis<S> {
    columns: Matrix<S>,
}

impl<S: Scalar> SubspaceBasis<S> {
    pub fn new(columns: Matrix<S>, tol: &Tolerances) -> Result<Self, G2Error> {
        if columns.rows() != 7 || columns.cols() != 6 {
            return Err(G2Error::BadShape { rows: columns.rows(), cols: columns.cols() });
        }
        let rank = columns.rank(tol.pivot);
        if rank != 6 {
            return Err(G2Error::RankDeficientBasis { rank });
        }
        Ok(SubspaceBasis { columns })
    }

    /// `(e₁, …, e₆)`.
    pub fn standard_slice() -> Self {
        let mut m = Matrix::zeros(7, 6);
        for k in 0..6 {
            m[(k, k)] = S::one();
        }
        SubspaceBasis { columns: m }
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.columns
    }

    pub fn to_json(&self) -> Value {
        let cols: Vec<Vec<String>> =
            (0..6).map(|c| (0..7).map(|r| self.columns[(r, c)].to_string()).collect()).collect();
        json!(cols)
    }
}

/// Entries uniform in `-3..=3`, resampled until the rank is 6.
pub fn random_basis(rng: &mut impl Rng) -> SubspaceBasis<Rational> {
    SubspaceBasis { columns: random::full_rank_matrix(rng, 7, 6, 3) }
}

/// Pullback of `phi` along the inclusion spanned by the basis columns.
pub fn restrict<S: Scalar>(phi: &KForm<S>, basis: &SubspaceBasis<S>) -> Result<KForm<S>, G2Error> {
    Ok(phi.pullback(&basis.columns)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub basis: SubspaceBasis<Rational>,
    pub form: KForm<Rational>,
    pub report: TypeReport<Rational>,
}

/// Restrict the standard form along each basis and classify, exactly.
/// Output order follows `bases`.
pub fn restrict_batch(bases: &[SubspaceBasis<Rational>], tol: &Tolerances) -> Result<Vec<Restriction>, G2Error> {
    let phi = standard_form::<Rational>();
    bases
        .par_iter()
        .map(|b| {
            let form = restrict(&phi, b)?;
            let report = classify::classify(&form, None, tol)?;
            Ok(Restriction { basis: b.clone(), form, report })
        })
        .collect()
}

/// `n` random bases from `seed`.
pub fn random_bases(n: usize, seed: u64) -> Vec<SubspaceBasis<Rational>> {
    let mut rng = random::rng(seed);
    (0..n).map(|_| random_basis(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::TypeLabel;
    use crate::exterior::standard;

    #[test]
    fn displayed_coefficients() {
        let phi = standard_form::<Rational>();
        assert_eq!(phi.num_terms(), 7);
        assert_eq!(phi.coeff(&[1, 2, 3]), Rational::from_integer(1.into()));
        assert_eq!(phi.coeff(&[3, 5, 6]), Rational::from_integer((-1).into()));
        assert_eq!(phi.coeff(&[1, 6, 7]), Rational::from_integer((-1).into()));
        assert_eq!(phi.coeff(&[1, 2, 4]), Rational::from_integer(0.into()));
    }

    #[test]
    fn standard_slice_is_omega_two() {
        let r = restrict(&standard_form::<Rational>(), &SubspaceBasis::standard_slice()).unwrap();
        assert_eq!(r, standard::omega2());
    }

    #[test]
    fn shifted_slice_is_type_two() {
        let mut m = Matrix::<Rational>::zeros(7, 6);
        for k in 0..6 {
            m[(k + 1, k)] = Rational::from_integer(1.into());
        }
        let b = SubspaceBasis::new(m, &Tolerances::default()).unwrap();
        let r = restrict(&standard_form(), &b).unwrap();
        // free of index 1: α₂₄₆ + α₂₅₇ + α₃₄₇ − α₃₅₆, renumbered
        let want = KForm::from_int_terms(6, &[(1, &[1, 3, 5]), (1, &[1, 4, 6]), (1, &[2, 3, 6]), (-1, &[2, 4, 5])]);
        assert_eq!(r, want);
        assert_eq!(classify::classify(&r, None, &Tolerances::default()).unwrap().label, TypeLabel::Type2);
    }

    #[test]
    fn equal_columns_are_rejected() {
        let mut m = SubspaceBasis::<Rational>::standard_slice().matrix().clone();
        m[(0, 1)] = Rational::from_integer(1.into());
        m[(1, 1)] = Rational::from_integer(0.into());
        let err = SubspaceBasis::new(m, &Tolerances::default()).unwrap_err();
        assert_eq!(err, G2Error::RankDeficientBasis { rank: 5 });
        let err = SubspaceBasis::new(Matrix::<Rational>::zeros(6, 6), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, G2Error::BadShape { .. }));
    }

    #[test]
    fn random_restrictions_are_type_two() {
        let out = restrict_batch(&random_bases(200, 7), &Tolerances::default()).unwrap();
        assert_eq!(out.len(), 200);
        for r in &out {
            assert_eq!(r.report.label, TypeLabel::Type2, "{:?}", r.basis);
        }
    }

    #[test]
    fn restriction_is_functorial() {
        let mut rng = random::rng(17);
        let phi = standard_form::<Rational>();
        for _ in 0..20 {
            let b = random_basis(&mut rng);
            let m = random::invertible_matrix(&mut rng, 6, 2);
            let bm = SubspaceBasis::new(b.matrix() * &m, &Tolerances::default()).unwrap();
            let lhs = restrict(&phi, &bm).unwrap();
            let rhs = restrict(&phi, &b).unwrap().pullback(&m).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn batch_order_is_deterministic() {
        let a = restrict_batch(&random_bases(10, 3), &Tolerances::default()).unwrap();
        let b = restrict_batch(&random_bases(10, 3), &Tolerances::default()).unwrap();
        assert_eq!(a, b);
    }
}

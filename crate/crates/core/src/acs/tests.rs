use num_traits::Zero;

use super::*;
use crate::classify::{classify, q_operator};
use crate::exterior::standard::{omega1, omega2, omega_normal, theta};
use crate::random;
use crate::scalar::{rat, Rational};

type Q = Rational;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn e(k: usize) -> Vector<Q> {
    Vector::unit(6, k - 1)
}

fn j_plus(omega: &KForm<Q>) -> Endo<Q> {
    complex_structures(omega, &theta(), &tol()).unwrap().0.j
}

/// `Im((dx¹+i dx⁴)∧(dx²+i dx⁵)∧(dx³+i dx⁶))` by expanding the eight
/// products directly.
fn imaginary_expansion_oracle() -> KForm<Q> {
    let mut im = KForm::zero(6, 3);
    for choice in 0..8usize {
        let idx: Vec<usize> = (0..3).map(|k| if choice >> k & 1 == 1 { k + 4 } else { k + 1 }).collect();
        let power = choice.count_ones();
        // i^power contributes to the imaginary part for odd powers
        let sign = match power % 4 {
            1 => 1,
            3 => -1,
            _ => continue,
        };
        let term = KForm::<Q>::basis(6, &[idx[0]]).wedge(&KForm::basis(6, &[idx[1]])).unwrap();
        let term = term.wedge(&KForm::basis(6, &[idx[2]])).unwrap();
        im = &im + &term.scaled(&Q::from_i64(sign));
    }
    im
}

#[test]
fn structures_of_canonical_forms() {
    let j = j_plus(&omega2());
    assert_eq!(j.mul_vec(&e(1)), -&e(6));
    assert_eq!(j.mul_vec(&e(6)), e(1));

    let j = j_plus(&omega_normal());
    assert_eq!(j.mul_vec(&e(1)), e(4));
    assert_eq!(j.mul_vec(&e(2)), e(5));
    assert_eq!(j.mul_vec(&e(3)), e(6));

    let (plus, minus) = complex_structures(&omega2::<Q>(), &theta(), &tol()).unwrap();
    assert_eq!(minus.j, -&plus.j);
    assert_eq!(plus.lambda, rat(-4, 1));
    assert!(square_defect(&plus.j).is_zero());
}

#[test]
fn non_type_two_is_rejected() {
    assert_eq!(
        complex_structures(&omega1::<Q>(), &theta(), &tol()),
        Err(AcsError::NotTypeTwo(TypeLabel::Type1))
    );
    assert!(matches!(normalize(&omega1::<Q>(), &theta(), &tol()), Err(AcsError::NotTypeTwo(_))));
}

#[test]
fn irrational_norm_is_reported_exactly_and_solved_in_float() {
    // λ scales by 1/s² under θ ↦ sθ, so the norm stays rational there
    let lambda = crate::classify::lambda_invariant(&omega_normal::<Q>(), &theta::<Q>().scaled(&rat(3, 1)), &tol());
    assert_eq!(lambda.unwrap(), rat(-4, 9));

    // 2α₁₂₃ − α₁₅₆ + α₂₄₆ − α₃₄₅ has λ = −8
    let w = &omega_normal::<Q>() + &KForm::basis(6, &[1, 2, 3]);
    assert_eq!(classify(&w, None, &tol()).unwrap().lambda, rat(-8, 1));
    assert!(matches!(complex_structures(&w, &theta(), &tol()), Err(AcsError::IrrationalNorm(_))));
    let (plus, _) = complex_structures(&w.to_float(), &theta::<f64>(), &tol()).unwrap();
    assert!(square_defect(&plus.j) < 1e-12);
    assert!(purity_residual(&w.to_float(), &plus.j) < 1e-12);
}

#[test]
fn purity_of_constructed_structures() {
    for w in [omega2::<Q>(), omega_normal()] {
        let (plus, minus) = complex_structures(&w, &theta(), &tol()).unwrap();
        assert!(purity_residual(&w, &plus.j).is_zero());
        assert!(purity_residual(&w, &minus.j).is_zero());
    }
    assert!(purity_residual(&omega2::<Q>(), &Matrix::identity(6)).is_zero());
    let mut shear = Matrix::<Q>::identity(6);
    shear[(0, 1)] = rat(1, 1);
    assert!(purity_residual(&omega2::<Q>(), &shear) > rat(0, 1));
}

#[test]
fn gamma_of_normal_form_is_dz123() {
    let w = omega_normal::<Q>();
    let g = make_gamma(&w, &j_plus(&w), &tol()).unwrap();
    assert_eq!(g.re, w);
    assert_eq!(g.im, imaginary_expansion_oracle());
    assert!(three_zero_residual(&g).is_zero());

    let conjugate = ComplexThreeForm { im: -&g.im, ..g.clone() };
    assert!(three_zero_residual(&conjugate) > rat(0, 1));
}

#[test]
fn gamma_of_omega2() {
    let w = omega2::<Q>();
    let j = j_plus(&w);
    let g = make_gamma(&w, &j, &tol()).unwrap();
    assert!(three_zero_residual(&g).is_zero());
    assert_eq!(classify(&g.im, None, &tol()).unwrap().label, TypeLabel::Type2);
    // im(v₁,v₂,v₃) = −ω(Jv₁,v₂,v₃) on every basis triple
    for a in 1..=6 {
        for b in 1..=6 {
            for c in 1..=6 {
                let lhs = g.im.eval(&[&e(a), &e(b), &e(c)]).unwrap();
                let rhs = -w.eval(&[&j.mul_vec(&e(a)), &e(b), &e(c)]).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }
    // ω(v, Jv, ·) = 0
    let mut rng = random::rng(3);
    for _ in 0..50 {
        let v = random::rational_vector(&mut rng, 6, 4);
        let contracted = w.interior(&v).unwrap().interior(&j.mul_vec(&v)).unwrap();
        assert!(contracted.is_zero());
    }
}

#[test]
fn gamma_rejects_impure_structure() {
    let w = omega2::<Q>();
    let j = j_plus(&omega_normal());
    assert!(matches!(make_gamma(&w, &j, &tol()), Err(AcsError::PurityViolated(_))));
}

#[test]
fn complex_evaluation_is_complex_linear() {
    let w = omega_normal::<Q>();
    let g = make_gamma(&w, &j_plus(&w), &tol()).unwrap();
    let u = ComplexVector { re: e(1), im: e(2) };
    let v = ComplexVector::real(e(2));
    let z = ComplexVector::real(e(3));
    let iu = ComplexVector { re: -&u.im, im: u.re.clone() };
    let base = g.eval([&u, &v, &z]).unwrap();
    let rotated = g.eval([&iu, &v, &z]).unwrap();
    assert_eq!(rotated, base.times_i_pow(1));
}

#[test]
fn normalize_examples() {
    let w = omega_normal::<Q>();
    let cob = normalize(&w, &theta(), &tol()).unwrap();
    assert!(cob.residual.is_zero());
    assert_eq!(w.pullback(&cob.p).unwrap(), w);

    let w = omega2::<Q>();
    let cob = normalize(&w, &theta(), &tol()).unwrap();
    assert!(cob.residual.is_zero());
    assert_eq!(w.pullback(&cob.p).unwrap(), omega_normal());
    assert_eq!(omega_normal::<Q>().pullback(&cob.p_inverse).unwrap(), w);
    assert_eq!(&cob.p * &cob.p_inverse, Matrix::identity(6));

    let w = omega_normal::<Q>().scaled(&rat(8, 1));
    let cob = normalize(&w, &theta(), &tol()).unwrap();
    assert_eq!(cob.c.norm_sqr(), rat(64, 1));
    assert!(cob.residual.is_zero());
}

#[test]
fn normalize_in_float() {
    let w = omega2::<Q>().to_float();
    let cob = normalize(&w, &theta(), &tol()).unwrap();
    assert!(cob.residual < 1e-9);
}

#[test]
fn normalize_random_pullbacks() {
    let mut rng = random::rng(11);
    for _ in 0..20 {
        let w = random::type_two_form(&mut rng);
        let cob = normalize(&w, &theta(), &tol()).unwrap();
        assert!(cob.residual.is_zero());
    }
}

#[test]
fn hitchin_operator_squares_to_minus_one() {
    for w in [omega2::<Q>(), omega_normal()] {
        let j = j_plus(&w);
        let h = hitchin_operator(&j, &tol()).unwrap();
        assert_eq!(&h * &h, -&Matrix::identity(20));
        let g = make_gamma(&w, &j, &tol()).unwrap();
        assert_eq!(apply_on_three_forms(&h, &w), g.im);
        assert_eq!(apply_on_three_forms(&h, &w), a_operator(&j, &w).unwrap());
    }
    let bad = Matrix::<Q>::identity(6);
    assert!(matches!(hitchin_operator(&bad, &tol()), Err(AcsError::NotComplexStructure(_))));
}

#[test]
fn a_and_d_operators() {
    let j = j_plus(&omega_normal());
    let a123 = KForm::<Q>::basis(6, &[1, 2, 3]);
    let pulled = a_operator(&j, &a123).unwrap();
    assert_eq!(pulled.eval(&[&e(4), &e(5), &e(6)]).unwrap(), rat(-1, 1));
    // D_J is a derivation
    let x = KForm::<Q>::basis(6, &[1, 5]);
    let y = KForm::<Q>::basis(6, &[2]);
    let lhs = d_operator(&j, &x.wedge(&y).unwrap()).unwrap();
    let rhs = &d_operator(&j, &x).unwrap().wedge(&y).unwrap() + &x.wedge(&d_operator(&j, &y).unwrap()).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn orientation_reversal_swaps_structures() {
    let w = omega2::<Q>();
    let (plus, minus) = complex_structures(&w, &theta(), &tol()).unwrap();
    let neg = -&theta::<Q>();
    let (plus_rev, minus_rev) = complex_structures(&w, &neg, &tol()).unwrap();
    assert_eq!(plus_rev.j, minus.j);
    assert_eq!(minus_rev.j, plus.j);
}

#[test]
fn rescaling_keeps_structure() {
    let w = omega2::<Q>();
    for t in [rat(3, 1), rat(1, 2), rat(7, 3)] {
        assert_eq!(j_plus(&w.scaled(&t)), j_plus(&w));
    }
}

#[test]
fn contraction_kernel_is_complex_line() {
    let w = omega2::<Q>();
    let j = j_plus(&w);
    let mut rng = random::rng(5);
    for _ in 0..50 {
        let v = random::nonzero_vector(&mut rng, 6, 4);
        let c = w.interior(&v).unwrap();
        let m = crate::classify::contraction_matrix(&c);
        // kernel of the 2-form as the kernel of its 5-vector-valued map
        let kernel = m.kernel(0.0);
        assert_eq!(kernel.len(), 2);
        let span = Matrix::from_columns(&[v.clone(), j.mul_vec(&v)]);
        for k in &kernel {
            let mut cols = span.columns();
            cols.push(k.clone());
            assert_eq!(Matrix::from_columns(&cols).rank(0.0), 2);
        }
    }
}

#[test]
fn q_identities_on_pullbacks() {
    let mut rng = random::rng(7);
    for _ in 0..5 {
        let w = random::type_two_form(&mut rng);
        let q = q_operator(&w, &theta()).unwrap();
        for _ in 0..20 {
            let v = random::rational_vector(&mut rng, 6, 4);
            let qv = q.mul_vec(&v);
            assert!(w.interior(&v).unwrap().interior(&qv).unwrap().is_zero());
            assert!(w.interior(&v).unwrap().wedge(&w.interior(&qv).unwrap()).unwrap().is_zero());
        }
    }
}

#[test]
fn uniqueness_harness() {
    let w = omega2::<Q>();
    let j = j_plus(&w);
    let passes = |cand: &Endo<Q>| purity_residual(&w, cand).is_zero() && square_defect(cand).is_zero();
    assert!(passes(&j));
    assert!(passes(&-&j));
    let mut rng = random::rng(13);
    for _ in 0..30 {
        let e = random::integer_matrix(&mut rng, 6, 6, 1);
        if e.is_negligible(0.0) {
            continue;
        }
        let perturbed = &j + &e.scaled(&rat(1, 10));
        assert!(!passes(&perturbed));
        // conjugates square to −I but are not pure unless they stabilize ω
        let p = random::invertible_matrix(&mut rng, 6, 2);
        let conj = &(&p * &j) * &p.inverse(0.0).unwrap();
        if conj != j && conj != -&j {
            assert!(!passes(&conj));
        }
    }
}

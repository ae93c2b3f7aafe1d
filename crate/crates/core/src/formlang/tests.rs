use proptest::prelude::*;

use super::expr::{self, add, cos, div, int, mul, neg, pow, sin, sqrt, var, Expr};
use super::*;
use crate::exterior::standard::{omega1, omega_normal};
use crate::exterior::{KForm, MultiIndex};
use crate::scalar::{rat, Rational};

const SIGMA: &str = "dx1^dx2^dx3 + dx1^dx4^dx5 + dx2^dx4^dx6 + sin(x3+x4)*dx3^dx5^dx6 + sin(x3+x4)*dx4^dx5^dx6";

fn at(x: [f64; 6]) -> [f64; 6] {
    x
}

#[test]
fn parses_representatives() {
    let f = FormField::parse("dx1^dx2^dx3 + dx4^dx5^dx6").unwrap();
    assert_eq!(f, FormField::constant(&omega1()));
    assert!(f.is_constant());

    let f = FormField::parse("sin(x3+x4)*dx4^dx5^dx6").unwrap();
    assert_eq!(f.num_terms(), 1);
    assert_eq!(f.coeff(&[4, 5, 6]), sin(add(vec![var(3), var(4)])));

    let f = FormField::parse("dx1^dx1^dx2").unwrap();
    assert!(f.is_zero());
    assert_eq!(f.degree(), 3);
}

#[test]
fn parses_signs_fractions_and_comments() {
    let text = "# canonical form\n dx1^dx2^dx3 - dx1^dx5^dx6\n + dx2^dx4^dx6 - dx3^dx4^dx5";
    assert_eq!(FormField::parse(text).unwrap(), FormField::constant(&omega_normal()));
    let f = FormField::parse("-1/2*dx2^dx1^dx3 + 0.25*dx4^dx5^dx6").unwrap();
    assert_eq!(f.coeff(&[1, 2, 3]), Expr::Const(rat(1, 2)));
    assert_eq!(f.coeff(&[4, 5, 6]), Expr::Const(rat(1, 4)));
    let f = FormField::parse("(x1 - x2)*dx1^dx2^dx3").unwrap();
    assert_eq!(f.coeff(&[1, 2, 3]), add(vec![var(1), neg(var(2))]));
    let f = FormField::parse("x1**2*dx1^dx2^dx3 + x2**-1*dx4^dx5^dx6").unwrap();
    assert_eq!(f.coeff(&[1, 2, 3]), pow(var(1), 2));
    assert_eq!(f.coeff(&[4, 5, 6]), pow(var(2), -1));
}

#[test]
fn parse_errors_carry_positions() {
    assert_eq!(
        FormField::parse("x7*dx1^dx2^dx3"),
        Err(FormlangError::UnknownCoordinate { name: "x7".into(), line: 1, col: 1 })
    );
    assert!(matches!(FormField::parse("dx1^dx2^dx7"), Err(FormlangError::UnknownCoordinate { col: 9, .. })));
    assert_eq!(
        FormField::parse("dx1^dx2^dx3\n + dx4^dx5"),
        Err(FormlangError::DegreeMismatch { expected: 3, found: 2, line: 2, col: 4 })
    );
    assert!(matches!(FormField::parse("2 x1*dx1^dx2^dx3"), Err(FormlangError::Syntax { line: 1, col: 3, .. })));
    assert!(matches!(FormField::parse("sin(x1*dx1^dx2^dx3"), Err(FormlangError::Syntax { .. })));
    assert!(matches!(FormField::parse("x1 + x2*dx1^dx2^dx3"), Err(FormlangError::Syntax { .. })));
    assert!(matches!(FormField::parse(""), Err(FormlangError::Syntax { .. })));
    assert!(matches!(FormField::parse("tan(x1)*dx1^dx2^dx3"), Err(FormlangError::Syntax { .. })));
    assert!(matches!(FormField::parse("x1**1.5*dx1^dx2^dx3"), Err(FormlangError::Syntax { .. })));
}

#[test]
fn differentiation_examples() {
    let s = sin(add(vec![var(3), var(4)]));
    assert_eq!(s.diff(2), cos(add(vec![var(3), var(4)])));
    assert_eq!(int(5).diff(0), Expr::zero());
    let sq = mul(vec![var(1), var(1)]);
    let d = sq.diff(0);
    let x = at([3.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(d.eval(&x).unwrap(), 6.0);
    let h = 1e-6;
    let fd = (sq.eval(&at([3.0 + h, 0.0, 0.0, 0.0, 0.0, 0.0])).unwrap()
        - sq.eval(&at([3.0 - h, 0.0, 0.0, 0.0, 0.0, 0.0])).unwrap())
        / (2.0 * h);
    assert!((fd - 6.0).abs() < 1e-6);
    // sqrt only introduces quotients and square roots
    let r = sqrt(var(1)).diff(0);
    assert_eq!(r.to_string(), "1/(2*sqrt(x1))");
}

#[test]
fn smart_constructors_cancel_syntactically() {
    let c = cos(add(vec![var(3), var(4)]));
    assert!(add(vec![c.clone(), neg(c.clone())]).is_zero());
    assert_eq!(add(vec![c.clone(), c.clone()]), mul(vec![int(2), c.clone()]));
    assert_eq!(mul(vec![int(0), c.clone()]), Expr::zero());
    assert_eq!(mul(vec![int(1), c.clone()]), c);
    assert_eq!(neg(neg(c.clone())), c);
    assert_eq!(div(int(3), int(6)), Expr::Const(rat(1, 2)));
}

#[test]
fn evaluation_domain_errors() {
    let x = [0.0; 6];
    assert!(matches!(div(int(1), var(1)).eval(&x), Err(DomainError::DivisionByZero(_))));
    assert!(matches!(sqrt(neg(add(vec![var(1), int(1)]))).eval(&x), Err(DomainError::NegativeSqrt(_))));
    let origin: [PiRational; 6] = std::array::from_fn(|_| PiRational::zero());
    assert!(matches!(div(int(1), var(1)).eval_exact(&origin), Err(DomainError::DivisionByZero(_))));
    let f = FormField::parse("1/x1*dx1^dx2^dx3").unwrap();
    assert!(f.eval(&Point::origin()).is_err());
}

fn sigma_point(s: &str) -> Point {
    Point::parse(&["0", "0", s, "0", "0", "0"]).unwrap()
}

#[test]
fn sigma_exact_values() {
    let sigma = FormField::parse(SIGMA).unwrap();
    let v = sigma.eval(&sigma_point("pi")).unwrap();
    let FieldValue::Exact(k) = v else { panic!("expected exact value") };
    assert_eq!(k, KForm::from_int_terms(6, &[(1, &[1, 2, 3]), (1, &[1, 4, 5]), (1, &[2, 4, 6])]));

    let FieldValue::Exact(k) = sigma.eval(&sigma_point("pi/2")).unwrap() else { panic!() };
    assert_eq!(k.coeff(&[3, 5, 6]), rat(1, 1));
    assert_eq!(k.coeff(&[4, 5, 6]), rat(1, 1));

    // irrational sine: float fallback
    let v = sigma.eval(&sigma_point("1")).unwrap();
    assert!(!v.is_exact());
    assert!((v.to_float().coeff(&[3, 5, 6]) - 1f64.sin()).abs() < 1e-15);

    let constant = FormField::constant(&omega_normal());
    assert_eq!(constant.eval(&sigma_point("1/3")).unwrap(), FieldValue::Exact(omega_normal()));
}

#[test]
fn exterior_derivative_examples() {
    let sigma = FormField::parse(SIGMA).unwrap();
    let d = sigma.exterior_derivative();
    assert!(d.is_zero());
    assert_eq!(d.degree(), 4);
    assert!(FormField::constant(&omega_normal()).exterior_derivative().is_zero());

    let f = FormField::parse("x4*dx1^dx2^dx3").unwrap();
    let d = f.exterior_derivative();
    assert_eq!(d.num_terms(), 1);
    assert_eq!(d.coeff(&[1, 2, 3, 4]), int(-1));
    // sign oracle: dx4∧α123 = (−1)^3 α1234
    let sign = MultiIndex::from_indices(&[4, 1, 2, 3]).unwrap().1;
    assert_eq!(sign, -1);
}

#[test]
fn canonical_printing_round_trips() {
    for text in [
        SIGMA,
        "dx1^dx2^dx3",
        "-dx1^dx2^dx3 + 1/2*dx4^dx5^dx6",
        "(x1 - 2*x2 + 3)*dx1^dx2^dx3 - x1/x2*dx2^dx3^dx4 - sin(x1)**3*dx1^dx5^dx6",
        "sqrt(1 + x1**2)*dx1^dx2^dx3 - (x1 + x2)**-2*dx2^dx5^dx6 - (-1/3)*x3*dx3^dx4^dx5",
        "0*dx1^dx2^dx3",
    ] {
        let f = FormField::parse(text).unwrap();
        let printed = f.to_string();
        let back = FormField::parse(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert_eq!(back, f, "{printed}");
    }
}

#[test]
fn pointwise_pullback_matches_constant_pullback() {
    let p = crate::random::invertible_matrix(&mut crate::random::rng(1), 6, 2);
    let rows: Vec<Vec<Expr>> = (0..6).map(|r| (0..6).map(|c| Expr::Const(p[(r, c)].clone())).collect()).collect();
    let field = FormField::constant(&omega_normal()).pointwise_pullback(&rows);
    let expected = omega_normal::<Rational>().pullback(&p).unwrap();
    assert_eq!(field, FormField::constant(&expected));
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (1usize..=6).prop_map(var),
        (-3i64..=3, 1i64..=3).prop_map(|(n, d)| Expr::Const(rat(n, d))),
    ]
}

/// Random expressions built through the smart constructors. Quotients and
/// square roots get arguments bounded away from the singular set.
fn any_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 48, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(add),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(mul),
            inner.clone().prop_map(neg),
            inner.clone().prop_map(sin),
            inner.clone().prop_map(cos),
            (inner.clone(), 1i32..=3).prop_map(|(e, n)| pow(e, n)),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| div(a, add(vec![int(1), pow(b, 2)]))),
            inner.clone().prop_map(|a| sqrt(add(vec![int(2), pow(a, 2)]))),
        ]
    })
}

fn any_point() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(-1.5f64..1.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivative_matches_central_differences(e in any_expr(), points in prop::collection::vec(any_point(), 10), i in 0usize..6) {
        let d = e.diff(i);
        for x in points {
            let (Ok(f), Ok(exact)) = (e.eval(&x), d.eval(&x)) else { continue };
            let h = 1e-6 * x[i].abs().max(1.0);
            let (mut up, mut down) = (x, x);
            up[i] += h;
            down[i] -= h;
            let (Ok(fu), Ok(fd)) = (e.eval(&up), e.eval(&down)) else { continue };
            let approx = (fu - fd) / (2.0 * h);
            let scale = 1f64.max(exact.abs()).max(f.abs());
            prop_assert!((approx - exact).abs() <= 1e-5 * scale, "{e}: d/dx{} = {exact}, fd = {approx}", i + 1);
        }
    }

    #[test]
    fn printed_expressions_reparse(e in any_expr()) {
        let printed = e.to_string();
        let back = parse_expr(&printed);
        prop_assert_eq!(back, Ok(e.clone()), "{}", printed);
    }

    #[test]
    fn printed_fields_reparse(coefs in prop::collection::vec(any_expr(), 1..5), picks in prop::collection::vec(0usize..20, 1..5)) {
        let basis = crate::exterior::basis_indices(6, 3);
        let terms = coefs.into_iter().zip(picks).map(|(c, k)| (c, basis[k].indices())).collect();
        let f = FormField::from_terms(3, terms);
        let printed = f.to_string();
        prop_assert_eq!(FormField::parse(&printed), Ok(f.clone()), "{}", printed);
    }

    #[test]
    fn permuted_indices_fold_the_sign(i in 1usize..=6, j in 1usize..=6, k in 1usize..=6, c in -5i64..=5) {
        prop_assume!(i != j && j != k && i != k);
        let text = format!("{c}*dx{i}^dx{j}^dx{k}");
        let f = FormField::parse(&text).unwrap();
        let (mi, sign) = MultiIndex::from_indices(&[i, j, k]).unwrap();
        let expected = if c == 0 { None } else { Some(Expr::Const(rat(c * sign as i64, 1))) };
        prop_assert_eq!(f.terms().find(|(m, _)| *m == mi).map(|(_, e)| e.clone()), expected);
    }

    #[test]
    fn d_squared_vanishes_on_polynomial_fields(coefs in prop::collection::vec(prop::collection::vec((-3i64..=3, 0usize..=6, 0usize..=6), 1..4), 20)) {
        // coefficients: sums of c·x_a·x_b (index 0 meaning the constant 1)
        let factor = |a: usize| if a == 0 { int(1) } else { var(a) };
        let basis = crate::exterior::basis_indices(6, 2);
        let mut f = FormField::zero(2);
        for (mi, monomials) in basis.into_iter().zip(coefs) {
            let c = expr::add(monomials.into_iter().map(|(c, a, b)| mul(vec![int(c), factor(a), factor(b)])).collect());
            f.add_term(mi, c);
        }
        prop_assert!(f.exterior_derivative().exterior_derivative().is_zero());
    }
}

//! From a type-2 form to its complex structure, its (3,0)-form and a
//! normalizing change of basis.

use sixform::acs;
use sixform::exterior::standard;
use sixform::random;
use sixform::scalar::{Rational, Tolerances};

fn main() {
    let tol = Tolerances::default();
    let theta = standard::theta::<Rational>();
    let mut rng = random::rng(2);
    let w = random::type_two_form(&mut rng);
    println!("omega = {w}");

    let (plus, _minus) = acs::complex_structures(&w, &theta, &tol).unwrap();
    println!("J+ =\n{}", plus.j);
    println!("purity residual {}, J^2 + I defect {}", acs::purity_residual(&w, &plus.j), acs::square_defect(&plus.j));

    let gamma = acs::make_gamma(&w, &plus.j, &tol).unwrap();
    println!("Im gamma = {}", gamma.im);
    println!("(3,0) residual {}", acs::three_zero_residual(&gamma));

    let cob = acs::normalize(&w, &theta, &tol).unwrap();
    let back = w.pullback(&cob.p).unwrap();
    println!("P*omega = {back}");
    assert_eq!(back, standard::omega_normal());
}

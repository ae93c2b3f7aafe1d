//! The Hitchin operator of J on 3-forms squares to -1 and carries
//! Re(gamma) to Im(gamma).

use sixform::acs;
use sixform::exterior::{basis_indices, standard, KForm};
use sixform::linalg::Matrix;
use sixform::scalar::{Rational, Tolerances};

fn main() {
    let tol = Tolerances::default();
    let w = standard::omega_normal::<Rational>();
    let (plus, _) = acs::complex_structures(&w, &standard::theta(), &tol).unwrap();
    let h = acs::hitchin_operator(&plus.j, &tol).unwrap();
    println!("H is {}x{}; H^2 = -I: {}", h.rows(), h.cols(), &h * &h == -&Matrix::identity(20));

    for mi in basis_indices(6, 3).into_iter().take(4) {
        let b = KForm::<Rational>::basis(6, &mi.indices());
        println!("H({b}) = {}", acs::apply_on_three_forms(&h, &b));
    }

    let gamma = acs::make_gamma(&w, &plus.j, &tol).unwrap();
    println!("H(Re gamma) = {}", acs::apply_on_three_forms(&h, &gamma.re));
    println!("Im gamma    = {}", gamma.im);
}

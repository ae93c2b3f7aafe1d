//! Integrability checks: closedness, then the Nijenhuis tensor of J+.

use sixform::exterior::standard;
use sixform::field::{self, ChartBox, IntegrabilityOptions, NijenhuisMode, SymbolicJ};
use sixform::formlang::FormField;
use sixform::scalar::{Rational, Tolerances};

fn main() {
    let tol = Tolerances::default();
    let theta = standard::theta();
    let bounds = ChartBox::parse(&["-1:1"; 6]).unwrap();
    let opts = IntegrabilityOptions { samples: 50, ..Default::default() };

    let constant = FormField::constant(&standard::omega_normal::<Rational>());
    let r = field::integrability(&constant, &bounds, &theta, &opts, &tol).unwrap();
    println!("constant omega_N: {}", r.verdict);

    let not_closed = FormField::parse("x4*dx1^dx2^dx3 - dx1^dx5^dx6 + dx2^dx4^dx6 - dx3^dx4^dx5").unwrap();
    let box2 = ChartBox::parse(&["0:1", "0:1", "0:1", "1:2", "0:1", "0:1"]).unwrap();
    let r = field::integrability(&not_closed, &box2, &theta, &opts, &tol).unwrap();
    println!("x4 field: {} (closed: {}, max |d omega| = {})", r.verdict, r.closed, r.max_d_omega);

    // N at one point of sigma, symbolically and by finite differences
    let sigma = FormField::parse(
        "dx1^dx2^dx3 + dx1^dx4^dx5 + dx2^dx4^dx6 + sin(x3+x4)*dx3^dx5^dx6 + sin(x3+x4)*dx4^dx5^dx6",
    )
    .unwrap();
    let x = [0.0, 0.0, 4.2, 0.1, 0.0, 0.0];
    let sym = SymbolicJ::new(&sigma, &theta).unwrap();
    let a = sym.nijenhuis(&x).unwrap();
    let b = field::nijenhuis_at(&sigma, &x, NijenhuisMode::FiniteDifference, field::DEFAULT_STEP, &theta, &tol).unwrap();
    println!("sigma at {x:?}: max |N| symbolic {:.6}, finite differences {:.6}", a.max_abs, b.max_abs);
}

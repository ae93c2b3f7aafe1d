//! Parse a coordinate-dependent 3-form and scan its type along a line.

use sixform::exterior::standard;
use sixform::field::{self, ChartBox};
use sixform::formlang::{FormField, Point};
use sixform::scalar::Tolerances;

fn main() {
    let sigma = FormField::parse(
        "dx1^dx2^dx3 + dx1^dx4^dx5 + dx2^dx4^dx6 + sin(x3+x4)*dx3^dx5^dx6 + sin(x3+x4)*dx4^dx5^dx6",
    )
    .unwrap();
    let tol = Tolerances::default();
    let theta = standard::theta();
    println!("d(sigma) = {}", field::exterior_derivative(&sigma));

    for x3 in ["pi/2", "pi", "3pi/2"] {
        let p = Point::parse(&["0", "0", x3, "0", "0", "0"]).unwrap();
        let r = field::type_at(&sigma, &p, &theta, &tol).unwrap();
        println!("x3 = {x3:6} {} (exact: {})", r.label(), r.is_exact());
    }

    let bounds = ChartBox::parse(&["0", "0", "0:2pi", "0", "0", "0"]).unwrap();
    let scan = field::scan_types(&sigma, &bounds, [1, 1, 16, 1, 1, 1], &theta, &tol).unwrap();
    print!("{}", scan.to_csv());
}

//! Restrict the G2 form on R^7 to hyperplanes; every restriction has type 2.

use sixform::classify::TypeLabel;
use sixform::g2::{self, SubspaceBasis};
use sixform::scalar::{Rational, Tolerances};

fn main() {
    let phi = g2::standard_form::<Rational>();
    println!("phi = {phi}");
    println!("on span(e1..e6): {}", g2::restrict(&phi, &SubspaceBasis::standard_slice()).unwrap());

    let out = g2::restrict_batch(&g2::random_bases(100, 42), &Tolerances::default()).unwrap();
    let type2 = out.iter().filter(|r| r.report.label == TypeLabel::Type2).count();
    println!("{type2}/{} random hyperplanes give type 2", out.len());
    println!("first: {}", out[0].form);
}

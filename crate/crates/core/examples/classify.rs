//! Classify the three canonical representatives and a random pullback.

use sixform::classify;
use sixform::exterior::standard;
use sixform::random;
use sixform::scalar::{Rational, Tolerances};

fn main() {
    let tol = Tolerances::default();
    let forms = [
        ("omega1", standard::omega1::<Rational>()),
        ("omega2", standard::omega2()),
        ("omega3", standard::omega3()),
    ];
    for (name, w) in &forms {
        let r = classify::classify(w, None, &tol).unwrap();
        println!("{name:8} {:6} lambda = {}", r.label.to_string(), r.lambda);
    }

    // the type survives a change of basis; lambda picks up det(P)^2
    let mut rng = random::rng(1);
    let p = random::invertible_matrix(&mut rng, 6, 2);
    let pulled = standard::omega2::<Rational>().pullback(&p).unwrap();
    let r = classify::classify(&pulled, None, &tol).unwrap();
    println!("P*omega2 {} lambda = {} det P = {}", r.label, r.lambda, p.det());
}

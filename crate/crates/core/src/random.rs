//! Seeded generators for test data, examples and the `g2 restrict --random`
//! command. Everything is reproducible from a `u64` seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exterior::{basis_indices, standard, KForm};
use crate::linalg::{Matrix, Vector};
use crate::scalar::{rat, Rational};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rational in `{n/d : |n| ≤ bound, 1 ≤ d ≤ 3}`.
pub fn small_rational(rng: &mut impl Rng, bound: i64) -> Rational {
    rat(rng.gen_range(-bound..=bound), rng.gen_range(1..=3))
}

pub fn integer_matrix(rng: &mut impl Rng, rows: usize, cols: usize, bound: i64) -> Matrix<Rational> {
    let data: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-bound..=bound)).collect();
    Matrix::<Rational>::from_i64(rows, cols, &data)
}

/// Integer matrix with entries in `[-bound, bound]` and the requested full
/// column rank, by rejection sampling.
pub fn full_rank_matrix(rng: &mut impl Rng, rows: usize, cols: usize, bound: i64) -> Matrix<Rational> {
    loop {
        let m = integer_matrix(rng, rows, cols, bound);
        if m.rank(0.0) == cols.min(rows) {
            return m;
        }
    }
}

pub fn invertible_matrix(rng: &mut impl Rng, n: usize, bound: i64) -> Matrix<Rational> {
    full_rank_matrix(rng, n, n, bound)
}

pub fn rational_vector(rng: &mut impl Rng, dim: usize, bound: i64) -> Vector<Rational> {
    Vector((0..dim).map(|_| small_rational(rng, bound)).collect())
}

pub fn nonzero_vector(rng: &mut impl Rng, dim: usize, bound: i64) -> Vector<Rational> {
    loop {
        let v = rational_vector(rng, dim, bound);
        if !v.is_negligible(0.0) {
            return v;
        }
    }
}

/// A 3-form on `R^6` with every coefficient drawn independently.
pub fn dense_three_form(rng: &mut impl Rng, bound: i64) -> KForm<Rational> {
    let coords: Vec<Rational> = basis_indices(6, 3).iter().map(|_| small_rational(rng, bound)).collect();
    KForm::from_coords(6, 3, &coords)
}

/// A type-2 form: the canonical form pulled back by a random invertible
/// integer matrix. Its `λ` is `−4·det(P)²`, so `√(−λ)` stays rational.
pub fn type_two_form(rng: &mut impl Rng) -> KForm<Rational> {
    let p = invertible_matrix(rng, 6, 2);
    standard::omega_normal::<Rational>().pullback(&p).expect("6x6 pullback")
}


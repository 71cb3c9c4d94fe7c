//! Seeded random representations shared by the integration suites.

#![allow(dead_code)]

use jdlg::linalg::{c, unit_root, ComplexMatrix};
use jdlg::representation::IndexModel;
use jdlg::MatrixRepresentation;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Largest modulus of a contracting eigenvalue: 0.1 inside the default
/// spectral boundary of 0.99.
pub const INNER_MAX: f64 = 0.89;

pub fn random_eigenvalues(rng: &mut ChaCha8Rng, d: usize) -> Vec<jdlg::C64> {
    let unimodular = rng.gen_range(0..=d);
    (0..d)
        .map(|i| {
            if i < unimodular {
                unit_root(rng.gen::<f64>())
            } else if rng.gen_bool(0.1) {
                c(0.0, 0.0)
            } else {
                unit_root(rng.gen::<f64>()) * rng.gen_range(0.0..INNER_MAX)
            }
        })
        .collect()
}

/// `I + A/2` with `A` uniform in the complex unit square; comfortably invertible.
pub fn random_similarity(rng: &mut ChaCha8Rng, d: usize) -> (ComplexMatrix, ComplexMatrix) {
    loop {
        let s = ComplexMatrix::from_fn(d, d, |i, j| {
            let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.5;
            if i == j {
                z + c(1.0, 0.0)
            } else {
                z
            }
        });
        if let Some(inv) = s.clone().try_inverse() {
            let sv = s.singular_values();
            let cond = sv.max() / sv.min();
            if cond < 50.0 {
                return (s, inv);
            }
        }
    }
}

pub fn conjugated(s: &ComplexMatrix, s_inv: &ComplexMatrix, eig: &[jdlg::C64]) -> ComplexMatrix {
    let d = ComplexMatrix::from_diagonal(&jdlg::ComplexVector::from_column_slice(eig));
    s * d * s_inv
}

/// A single diagonalizable generator with every eigenvalue either unimodular
/// or of modulus at most [`INNER_MAX`].
pub fn random_single(rng: &mut ChaCha8Rng, d: usize) -> (MatrixRepresentation, Vec<jdlg::C64>) {
    let eig = random_eigenvalues(rng, d);
    let (s, s_inv) = random_similarity(rng, d);
    let rep = MatrixRepresentation::single(conjugated(&s, &s_inv, &eig))
        .expect("square finite matrix")
        .with_index_model(IndexModel::Lattice { start: 1 });
    (rep, eig)
}

/// Two simultaneously diagonalizable generators.
pub fn random_pair(rng: &mut ChaCha8Rng, d: usize) -> MatrixRepresentation {
    let a = random_eigenvalues(rng, d);
    let b = random_eigenvalues(rng, d);
    let (s, s_inv) = random_similarity(rng, d);
    MatrixRepresentation::new(vec![("a", conjugated(&s, &s_inv, &a)), ("b", conjugated(&s, &s_inv, &b))])
        .expect("valid generators")
        .with_index_model(IndexModel::Lattice { start: 1 })
}

//! Random unitaries, machines and words for property tests.
//!
//! Unitaries come from Gram–Schmidt orthonormalization of matrices with
//! independent standard complex Gaussian entries.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{Complex, ComplexMatrix, ComplexVector, OrthonormalBasis, STRUCTURAL_TOL};
use crate::qfa::Qfa;
use crate::word::{Symbol, Word};

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    ComplexVector::new((0..dim).map(|_| gaussian_complex(rng)).collect())
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    let v = random_vector(rng, dim);
    let n = v.norm();
    v.scale(Complex::new(1.0 / n, 0.0))
}

/// `k` orthonormal vectors in `C^dim`.
pub fn random_orthonormal_rows<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    k: usize,
) -> Vec<ComplexVector> {
    let mut rows: Vec<ComplexVector> = Vec::with_capacity(k);
    while rows.len() < k {
        let mut v = random_vector(rng, dim);
        for _ in 0..2 {
            for h in &rows {
                let amp = h.inner(&v);
                v = v.add(&h.scale(-amp)).expect("same dimension");
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            rows.push(v.scale(Complex::new(1.0 / n, 0.0)));
        }
    }
    rows
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let rows = random_orthonormal_rows(rng, dim, dim);
    ComplexMatrix::from_rows(rows.into_iter().map(ComplexVector::into_entries).collect())
        .expect("square")
}

pub fn random_basis<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> OrthonormalBasis {
    OrthonormalBasis::new(random_orthonormal_rows(rng, dim, k), dim, STRUCTURAL_TOL)
        .expect("orthonormal by construction")
}

/// Unitary machine with Haar-like letters, a random unit initial state and a
/// random accepting subspace of the given rank.
pub fn random_qfa<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    alphabet: &[Symbol],
    accept_rank: usize,
) -> Qfa {
    let transitions: BTreeMap<Symbol, ComplexMatrix> = alphabet
        .iter()
        .map(|a| (a.clone(), random_unitary(rng, dim)))
        .collect();
    Qfa::new(
        alphabet.to_vec(),
        random_unit_vector(rng, dim),
        transitions,
        random_basis(rng, dim, accept_rank.min(dim)),
        false,
    )
    .expect("valid random machine")
}

pub fn random_word<R: Rng + ?Sized>(rng: &mut R, alphabet: &[Symbol], len: usize) -> Word {
    (0..len)
        .map(|_| alphabet[rng.random_range(0..alphabet.len())].clone())
        .collect()
}

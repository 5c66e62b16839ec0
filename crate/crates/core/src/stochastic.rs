//! Bilinear representations `f(w) = π · M_{w₁} ⋯ M_{wₙ} · η` of quantum
//! automata, over the complex numbers and over the reals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{Complex, ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::qfa::Qfa;
use crate::word::{Symbol, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Complex,
    Real,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    pub dim: usize,
    pub pi: ComplexVector,
    pub matrices: BTreeMap<Symbol, ComplexMatrix>,
    pub eta: ComplexVector,
    pub kind: FormKind,
}

impl BilinearForm {
    pub fn new(
        pi: ComplexVector,
        matrices: BTreeMap<Symbol, ComplexMatrix>,
        eta: ComplexVector,
        kind: FormKind,
    ) -> Result<Self> {
        let dim = pi.dim();
        if dim == 0 {
            return Err(Error::Shape("bilinear form needs dimension at least 1".into()));
        }
        if eta.dim() != dim {
            return Err(Error::Shape(format!("eta has length {}, expected {dim}", eta.dim())));
        }
        for (a, m) in &matrices {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::Shape(format!(
                    "matrix for `{a}` is {}x{}, expected {dim}x{dim}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if kind == FormKind::Real {
            let complex_entry = pi
                .iter()
                .chain(eta.iter())
                .chain(matrices.values().flat_map(|m| m.data().iter()))
                .any(|z| z.im != 0.0);
            if complex_entry {
                return Err(Error::Invariant("real form has a nonzero imaginary part".into()));
            }
        }
        Ok(Self {
            dim,
            pi,
            matrices,
            eta,
            kind,
        })
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        self.matrices.keys().cloned().collect()
    }

    /// `π · M_w · η` as a complex number.
    pub fn value(&self, w: &Word) -> Result<Complex> {
        let mut v = self.pi.clone();
        for a in w {
            let m = self
                .matrices
                .get(a)
                .ok_or_else(|| Error::UnknownSymbol(a.to_string()))?;
            v = v.mul_matrix(m)?;
        }
        Ok(v.iter().zip(self.eta.iter()).map(|(x, y)| x * y).sum())
    }
}

/// `π = conj(s) ⊗ s`, `M_a = conj(U_a) ⊗ U_a`, `η = Σ_i h_i ⊗ conj(h_i)`.
///
/// With the row-vector convention `⟨h|v⟩ = Σ conj(h_j) v_j`, this gives
/// `π M_w η = Σ_i |⟨h_i | s U_w⟩|²`.
pub fn to_bilinear(q: &Qfa) -> BilinearForm {
    let n = q.dim();
    let mut eta = ComplexVector::zeros(n * n);
    for h in q.accept_basis().vectors() {
        eta = eta.add(&h.tensor(&h.conj())).expect("same dimension");
    }
    let matrices = q
        .transitions()
        .iter()
        .map(|(a, u)| (a.clone(), u.conj().tensor_product(u)))
        .collect();
    BilinearForm::new(q.s_init().conj().tensor(q.s_init()), matrices, eta, FormKind::Complex)
        .expect("consistent dimensions")
}

/// The 2×2 real block `[[a, b], [−b, a]]` of `a + bi`.
pub fn complex_block(z: Complex) -> [[f64; 2]; 2] {
    [[z.re, z.im], [-z.im, z.re]]
}

/// Expands every complex entry into its 2×2 real block; `π` keeps the top
/// row of its blocks and `η` the left column, so the real form evaluates to
/// the real part of the complex one.
pub fn to_real(b: &BilinearForm) -> Result<BilinearForm> {
    if b.kind != FormKind::Complex {
        return Err(Error::Mode("to_real expects a complex form".into()));
    }
    let n = b.dim;
    let r = |x: f64| Complex::new(x, 0.0);
    let mut pi = Vec::with_capacity(2 * n);
    for z in b.pi.iter() {
        let block = complex_block(*z);
        pi.push(r(block[0][0]));
        pi.push(r(block[0][1]));
    }
    let mut eta = Vec::with_capacity(2 * n);
    for z in b.eta.iter() {
        let block = complex_block(*z);
        eta.push(r(block[0][0]));
        eta.push(r(block[1][0]));
    }
    let matrices = b
        .matrices
        .iter()
        .map(|(a, m)| {
            let mut out = ComplexMatrix::zeros(2 * n, 2 * n);
            for i in 0..n {
                for j in 0..n {
                    let block = complex_block(m[(i, j)]);
                    for (di, row) in block.iter().enumerate() {
                        for (dj, x) in row.iter().enumerate() {
                            out[(2 * i + di, 2 * j + dj)] = r(*x);
                        }
                    }
                }
            }
            (a.clone(), out)
        })
        .collect();
    BilinearForm::new(ComplexVector::new(pi), matrices, ComplexVector::new(eta), FormKind::Real)
}

/// Imaginary parts beyond this are reported as an invariant violation when
/// evaluating a complex form.
pub const IMAGINARY_TOL: f64 = 1e-9;

/// Real value of the form on `w`. For complex forms the imaginary part must
/// vanish, as it does for every form built by [`to_bilinear`].
pub fn eval_bilinear(b: &BilinearForm, w: &Word) -> Result<f64> {
    let z = b.value(w)?;
    if b.kind == FormKind::Complex && z.im.abs() >= IMAGINARY_TOL * (1.0 + z.re.abs()) {
        return Err(Error::Invariant(format!(
            "bilinear form value {z} has a nonzero imaginary part"
        )));
    }
    Ok(z.re)
}

/// `Σ_a M_a`, the single matrix whose powers give per-length sums.
pub fn letter_sum(b: &BilinearForm) -> ComplexMatrix {
    let mut sum = ComplexMatrix::zeros(b.dim, b.dim);
    for m in b.matrices.values() {
        sum = sum.add(m).expect("same shape");
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{c, OrthonormalBasis};
    use crate::catalog;
    use crate::qfa::embed_dfa;
    use crate::random::{gaussian_complex, random_qfa, random_word};
    use crate::word::{alphabet, words_up_to};
    use rand::SeedableRng;

    fn ab() -> Vec<Symbol> {
        alphabet(&["a", "b"])
    }

    #[test]
    fn scalar_machine() {
        let s = c(0.6, 0.8);
        let u = c(0.0, 1.0);
        let mut t = BTreeMap::new();
        t.insert(Symbol::from("a"), ComplexMatrix::diag(&[u]));
        let q = Qfa::new(
            alphabet(&["a"]),
            ComplexVector::new(vec![s]),
            t,
            OrthonormalBasis::standard(1, &[0]).unwrap(),
            false,
        )
        .unwrap();
        let b = to_bilinear(&q);
        assert_eq!(b.dim, 1);
        for n in 0..4 {
            let w = Word::from_chars(&"a".repeat(n));
            assert!((eval_bilinear(&b, &w).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_machine_form() {
        let b = to_bilinear(&catalog::measurement_qfa(0).unwrap());
        for w in words_up_to(&ab(), 3) {
            assert!((eval_bilinear(&b, &w).unwrap() - 0.75).abs() < 1e-12);
        }
        let r = to_real(&b).unwrap();
        assert_eq!(r.dim, 8);
        assert!((eval_bilinear(&r, &Word::from_chars("ab")).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn random_machines_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for dim in [2, 3] {
            let q = random_qfa(&mut rng, dim, &ab(), 2.min(dim));
            let b = to_bilinear(&q);
            let r = to_real(&b).unwrap();
            assert_eq!(r.dim, 2 * dim * dim);
            for _ in 0..20 {
                let w = random_word(&mut rng, &ab(), 6);
                let p = q.accept_probability(&w).unwrap();
                assert!(b.value(&w).unwrap().im.abs() < 1e-9);
                assert!((eval_bilinear(&b, &w).unwrap() - p).abs() < 1e-9);
                assert!((eval_bilinear(&r, &w).unwrap() - p).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn complex_accept_vectors() {
        // accept vector with a complex phase exercises the conjugation in η
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let q = random_qfa(&mut rng, 2, &ab(), 0);
        let h = ComplexVector::new(vec![c(0.0, 0.6), c(0.8, 0.0)]);
        let q = q.with_accept_basis(OrthonormalBasis::new(vec![h], 2, 1e-9).unwrap()).unwrap();
        let b = to_bilinear(&q);
        for w in words_up_to(&ab(), 3) {
            let p = q.accept_probability(&w).unwrap();
            assert!((eval_bilinear(&b, &w).unwrap() - p).abs() < 1e-12);
        }
    }

    #[test]
    fn dfa_form_is_characteristic() {
        let d = catalog::bb_forbidden_dfa();
        let b = to_bilinear(&embed_dfa(&d).unwrap());
        for w in words_up_to(d.alphabet(), 6) {
            let expected = if d.accepts(&w).unwrap() { 1.0 } else { 0.0 };
            assert_eq!(eval_bilinear(&b, &w).unwrap(), expected);
        }
    }

    #[test]
    fn identity_block() {
        assert_eq!(complex_block(Complex::new(1.0, 0.0)), [[1.0, 0.0], [0.0, 1.0]]);
    }

    fn block_mul(x: [[f64; 2]; 2], y: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
            }
        }
        out
    }

    #[test]
    fn block_map_is_a_ring_homomorphism() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let (x, y) = (gaussian_complex(&mut rng), gaussian_complex(&mut rng));
            let prod = block_mul(complex_block(x), complex_block(y));
            let expected = complex_block(x * y);
            let sum = complex_block(x + y);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((prod[i][j] - expected[i][j]).abs() < 1e-12);
                    let added = complex_block(x)[i][j] + complex_block(y)[i][j];
                    assert!((sum[i][j] - added).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn associativity_of_appended_words() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let b = to_bilinear(&random_qfa(&mut rng, 2, &ab(), 1));
        let w = Word::from_chars("abb");
        let v = Word::from_chars("ba");
        let mw = b.matrices[&Symbol::from("a")]
            .mul(&b.matrices[&Symbol::from("b")])
            .unwrap()
            .mul(&b.matrices[&Symbol::from("b")])
            .unwrap();
        let mv = b.matrices[&Symbol::from("b")].mul(&b.matrices[&Symbol::from("a")]).unwrap();
        let direct: Complex = b
            .pi
            .mul_matrix(&mw.mul(&mv).unwrap())
            .unwrap()
            .iter()
            .zip(b.eta.iter())
            .map(|(x, y)| x * y)
            .sum();
        assert!((b.value(&w.concat(&v)).unwrap() - direct).norm() < 1e-12);
    }

    #[test]
    fn unknown_symbol_and_wrong_kind() {
        let b = to_bilinear(&catalog::measurement_qfa(0).unwrap());
        assert!(matches!(eval_bilinear(&b, &Word::from_chars("z")), Err(Error::UnknownSymbol(_))));
        let r = to_real(&b).unwrap();
        assert!(matches!(to_real(&r), Err(Error::Mode(_))));
    }
}

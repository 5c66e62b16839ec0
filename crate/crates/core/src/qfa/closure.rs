//! Closure constructions on quantum regular languages.

use std::collections::BTreeMap;

use crate::algebra::{real, Complex, ComplexMatrix, ComplexVector, OrthonormalBasis, STRUCTURAL_TOL};
use crate::error::{Error, Result};
use crate::word::{Symbol, Word};

use super::Qfa;

fn check_alphabets(q: &Qfa, r: &Qfa) -> Result<()> {
    if q.has_same_alphabet(r.alphabet()) {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch(format!(
            "{:?} vs {:?}",
            q.alphabet(),
            r.alphabet()
        )))
    }
}

/// `aQ ⊕ bR`, recognizing `|a|²·f_Q + |b|²·f_R`.
///
/// When both inputs are unitary the weights must satisfy `|a|² + |b|² = 1`;
/// the output is unitary exactly when both inputs are.
pub fn weighted_direct_sum(q: &Qfa, r: &Qfa, a: Complex, b: Complex) -> Result<Qfa> {
    check_alphabets(q, r)?;
    let generalized = q.is_generalized() || r.is_generalized();
    if !generalized {
        let norm = a.norm_sqr() + b.norm_sqr();
        if (norm - 1.0).abs() >= STRUCTURAL_TOL {
            return Err(Error::Invariant(format!(
                "unitary direct sum needs |a|²+|b|² = 1, got {norm}"
            )));
        }
    }
    let s_init = q.s_init().scale(a).direct_sum(&r.s_init().scale(b));
    let transitions = q
        .alphabet()
        .iter()
        .map(|s| Ok((s.clone(), q.transition(s)?.direct_sum(r.transition(s)?))))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Qfa::new(
        q.alphabet().to_vec(),
        s_init,
        transitions,
        q.accept_basis().direct_sum(r.accept_basis()),
        generalized,
    )
}

/// `Q ⊗ R`, recognizing `f_Q · f_R`.
pub fn tensor(q: &Qfa, r: &Qfa) -> Result<Qfa> {
    check_alphabets(q, r)?;
    let transitions = q
        .alphabet()
        .iter()
        .map(|s| {
            Ok((
                s.clone(),
                q.transition(s)?.tensor_product(r.transition(s)?),
            ))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Qfa::new(
        q.alphabet().to_vec(),
        q.s_init().tensor(r.s_init()),
        transitions,
        q.accept_basis().tensor(r.accept_basis()),
        q.is_generalized() || r.is_generalized(),
    )
}

/// Two-state machine with `f(w) = c` for every word.
pub fn constant(value: f64, alphabet: &[Symbol]) -> Result<Qfa> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidArgument(format!(
            "constant must lie in [0, 1], got {value}"
        )));
    }
    let transitions = alphabet
        .iter()
        .map(|a| (a.clone(), ComplexMatrix::identity(2)))
        .collect();
    Qfa::new(
        alphabet.to_vec(),
        ComplexVector::new(vec![real(value.sqrt()), real((1.0 - value).sqrt())]),
        transitions,
        OrthonormalBasis::standard(2, &[0])?,
        false,
    )
}

/// Same machine accepting on the orthogonal complement, recognizing `1 − f`.
pub fn complement(q: &Qfa) -> Result<Qfa> {
    if q.is_generalized() {
        return Err(Error::Mode(
            "complement needs a unitary machine; 1 - f is not guaranteed otherwise".into(),
        ));
    }
    q.with_accept_basis(q.accept_basis().orthonormal_complement()?)
}

/// Pulls `q` back along the homomorphism `h`: the new machine reads the keys
/// of `h` and `U'_a = U_{h(a)}`, so `f'(w) = f_q(h(w))`.
pub fn inverse_homomorphism(q: &Qfa, h: &BTreeMap<Symbol, Word>) -> Result<Qfa> {
    let transitions = h
        .iter()
        .map(|(a, image)| Ok((a.clone(), q.word_matrix(image)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let generalized = q.is_generalized();
    Qfa::new(
        h.keys().cloned().collect(),
        q.s_init().clone(),
        transitions.clone(),
        q.accept_basis().clone(),
        generalized,
    )
    // long products of unitaries can drift past the structural tolerance
    .or_else(|e| match e {
        Error::Invariant(_) if !generalized => Qfa::new(
            h.keys().cloned().collect(),
            q.s_init().clone(),
            transitions,
            q.accept_basis().clone(),
            true,
        ),
        other => Err(other),
    })
}

/// Apply `h` letter by letter.
pub fn apply_homomorphism(h: &BTreeMap<Symbol, Word>, w: &Word) -> Result<Word> {
    let mut out = Word::empty();
    for a in w {
        let image = h.get(a).ok_or_else(|| Error::UnknownSymbol(a.to_string()))?;
        for s in image {
            out.push(s.clone());
        }
    }
    Ok(out)
}

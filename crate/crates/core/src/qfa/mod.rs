//! Real-time quantum finite automata.
//!
//! A machine holds an initial row vector, one transition matrix per input
//! symbol and an orthonormal basis of its accepting subspace. The acceptance
//! probability of `w` is `|s_init · U_{w_1} ⋯ U_{w_n} · P_accept|²`.

mod closure;
mod dfa;
mod pump;

use std::collections::{BTreeMap, BTreeSet};

pub use closure::{
    apply_homomorphism, complement, constant, inverse_homomorphism, tensor, weighted_direct_sum,
};
pub use dfa::{embed_dfa, monoid_is_group, Dfa};
pub use pump::{find_pump, verify_pump, PUMP_CAP_MAX, PUMP_CAP_MIN};

use crate::algebra::{Complex, ComplexMatrix, ComplexVector, OrthonormalBasis, STRUCTURAL_TOL};
use crate::error::{Error, Result};
use crate::word::{Symbol, Word};

/// Largest number of paths `path_sum_oracle` will enumerate.
pub const PATH_SUM_GUARD: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Qfa {
    alphabet: Vec<Symbol>,
    s_init: ComplexVector,
    transitions: BTreeMap<Symbol, ComplexMatrix>,
    accept_basis: OrthonormalBasis,
    generalized: bool,
}

impl Qfa {
    /// Builds a machine, enforcing the unitary-mode invariants unless
    /// `generalized` is set.
    pub fn new(
        alphabet: Vec<Symbol>,
        s_init: ComplexVector,
        transitions: BTreeMap<Symbol, ComplexMatrix>,
        accept_basis: OrthonormalBasis,
        generalized: bool,
    ) -> Result<Self> {
        let n = s_init.dim();
        if n == 0 {
            return Err(Error::Shape("state space must be non-empty".into()));
        }
        let distinct: BTreeSet<&Symbol> = alphabet.iter().collect();
        if distinct.len() != alphabet.len() {
            return Err(Error::Invariant("alphabet lists a symbol twice".into()));
        }
        if transitions.len() != alphabet.len()
            || alphabet.iter().any(|a| !transitions.contains_key(a))
        {
            return Err(Error::Invariant(
                "every alphabet symbol needs exactly one transition matrix".into(),
            ));
        }
        if !s_init.is_finite() {
            return Err(Error::Invariant("s_init has non-finite entries".into()));
        }
        for (a, u) in &transitions {
            if u.rows() != n || u.cols() != n {
                return Err(Error::Shape(format!(
                    "U_{a} is {}x{}, expected {n}x{n}",
                    u.rows(),
                    u.cols()
                )));
            }
            if !u.is_finite() {
                return Err(Error::Invariant(format!("U_{a} has non-finite entries")));
            }
        }
        if accept_basis.ambient_dim() != n {
            return Err(Error::Shape(format!(
                "accepting basis lives in dimension {}, machine has {n}",
                accept_basis.ambient_dim()
            )));
        }
        if !generalized {
            let norm = s_init.norm_sqr();
            if (norm - 1.0).abs() >= STRUCTURAL_TOL {
                return Err(Error::Invariant(format!(
                    "unitary machine needs |s_init|² = 1, got {norm}"
                )));
            }
            for (a, u) in &transitions {
                let dev = u.unitarity_deviation()?;
                if dev >= STRUCTURAL_TOL {
                    return Err(Error::Invariant(format!(
                        "U_{a} is not unitary (deviation {dev:e})"
                    )));
                }
            }
        }
        Ok(Self {
            alphabet,
            s_init,
            transitions,
            accept_basis,
            generalized,
        })
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.s_init.dim()
    }

    pub fn s_init(&self) -> &ComplexVector {
        &self.s_init
    }

    pub fn transitions(&self) -> &BTreeMap<Symbol, ComplexMatrix> {
        &self.transitions
    }

    pub fn transition(&self, a: &Symbol) -> Result<&ComplexMatrix> {
        self.transitions
            .get(a)
            .ok_or_else(|| Error::UnknownSymbol(a.to_string()))
    }

    pub fn accept_basis(&self) -> &OrthonormalBasis {
        &self.accept_basis
    }

    pub fn is_generalized(&self) -> bool {
        self.generalized
    }

    pub fn has_same_alphabet(&self, other_alphabet: &[Symbol]) -> bool {
        let mine: BTreeSet<&Symbol> = self.alphabet.iter().collect();
        let theirs: BTreeSet<&Symbol> = other_alphabet.iter().collect();
        mine == theirs
    }

    /// State vector after reading `w`.
    pub fn run(&self, w: &Word) -> Result<ComplexVector> {
        let mut v = self.s_init.clone();
        for a in w {
            v = v.mul_matrix(self.transition(a)?)?;
        }
        Ok(v)
    }

    /// `U_w`, the ordered product of the letter matrices (identity for ε).
    pub fn word_matrix(&self, w: &Word) -> Result<ComplexMatrix> {
        let mut m = ComplexMatrix::identity(self.dim());
        for a in w {
            m = m.mul(self.transition(a)?)?;
        }
        Ok(m)
    }

    /// Amplitudes of the final state along each accepting basis vector.
    pub fn accept_amplitudes(&self, w: &Word) -> Result<Vec<Complex>> {
        Ok(self.accept_basis.coordinates(&self.run(w)?))
    }

    pub fn accept_probability(&self, w: &Word) -> Result<f64> {
        Ok(self.accept_basis.projected_norm_sqr(&self.run(w)?))
    }

    /// Replaces the accepting subspace, keeping everything else.
    pub fn with_accept_basis(&self, accept_basis: OrthonormalBasis) -> Result<Self> {
        Self::new(
            self.alphabet.clone(),
            self.s_init.clone(),
            self.transitions.clone(),
            accept_basis,
            self.generalized,
        )
    }

    /// Same machine with the unitary-mode checks switched off.
    pub fn into_generalized(self) -> Self {
        Self {
            generalized: true,
            ..self
        }
    }

    /// Equivalent machine whose accepting subspace is spanned by the first
    /// `r` standard basis vectors. The change of basis is unitary, so the
    /// mode of the machine is preserved.
    pub fn with_standard_accept_basis(&self) -> Result<Self> {
        let complement = self.accept_basis.orthonormal_complement()?;
        let rows: Vec<Vec<Complex>> = self
            .accept_basis
            .vectors()
            .iter()
            .chain(complement.vectors())
            .map(|v| v.entries().to_vec())
            .collect();
        let b = ComplexMatrix::from_rows(rows)?;
        let b_dag = b.conjugate_transpose();
        let s_init = self.s_init.mul_matrix(&b_dag)?;
        let transitions = self
            .transitions
            .iter()
            .map(|(a, u)| Ok((a.clone(), b.mul(u)?.mul(&b_dag)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let indices: Vec<usize> = (0..self.accept_basis.len()).collect();
        let accept = OrthonormalBasis::standard(self.dim(), &indices)?;
        // Rotation error can push a unitary machine just outside tolerance;
        // re-validate in generalized mode when that happens.
        Self::new(
            self.alphabet.clone(),
            s_init.clone(),
            transitions.clone(),
            accept.clone(),
            self.generalized,
        )
        .or_else(|_| Self::new(self.alphabet.clone(), s_init, transitions, accept, true))
    }
}

/// Acceptance probability by explicit enumeration of state paths: every entry
/// of `U_w` is expanded as a sum over intermediate state sequences.
pub fn path_sum_oracle(q: &Qfa, w: &Word) -> Result<f64> {
    let n = q.dim();
    let len = w.len();
    let paths = (n as u128).checked_pow(len as u32 + 1).unwrap_or(u128::MAX);
    if paths > PATH_SUM_GUARD {
        return Err(Error::OracleScale(format!(
            "{n}^{} paths exceed the guard of {PATH_SUM_GUARD}",
            len + 1
        )));
    }
    let mats: Vec<&ComplexMatrix> = w.iter().map(|a| q.transition(a)).collect::<Result<_>>()?;

    // word[s0][s_len] = Σ over s1..s_{len-1} of Π U_{w_t}[s_{t-1}, s_t]
    let mut word = vec![vec![Complex::new(0.0, 0.0); n]; n];
    let mut states = vec![0usize; len + 1];
    loop {
        let mut amp = Complex::new(1.0, 0.0);
        for (t, m) in mats.iter().enumerate() {
            amp *= m[(states[t], states[t + 1])];
        }
        word[states[0]][states[len]] += amp;

        // odometer over the state sequence
        let mut pos = 0;
        loop {
            if pos > len {
                let final_state: Vec<Complex> = (0..n)
                    .map(|j| (0..n).map(|i| q.s_init()[i] * word[i][j]).sum())
                    .collect();
                return Ok(q
                    .accept_basis()
                    .projected_norm_sqr(&ComplexVector::new(final_state)));
            }
            states[pos] += 1;
            if states[pos] < n {
                break;
            }
            states[pos] = 0;
            pos += 1;
        }
    }
}

//! Deterministic automata, their embedding as generalized quantum automata,
//! and the group test on the transition monoid.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::algebra::{ComplexMatrix, ComplexVector, OrthonormalBasis, ONE};
use crate::error::{Error, Result};
use crate::word::{Symbol, Word};

use super::Qfa;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    states: Vec<String>,
    alphabet: Vec<Symbol>,
    /// `delta[state][letter]`
    delta: Vec<Vec<usize>>,
    init: usize,
    accepting: BTreeSet<usize>,
}

impl Dfa {
    /// `transitions` lists `(from, symbol, to)` and must be total.
    pub fn new(
        states: Vec<String>,
        alphabet: Vec<Symbol>,
        transitions: &[(String, Symbol, String)],
        init: &str,
        accepting: &[String],
    ) -> Result<Self> {
        let index = |name: &str| {
            states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::Invariant(format!("unknown state `{name}`")))
        };
        let letter = |a: &Symbol| {
            alphabet
                .iter()
                .position(|s| s == a)
                .ok_or_else(|| Error::UnknownSymbol(a.to_string()))
        };
        let mut delta = vec![vec![None; alphabet.len()]; states.len()];
        for (from, a, to) in transitions {
            let slot = &mut delta[index(from)?][letter(a)?];
            if slot.is_some() {
                return Err(Error::Invariant(format!("duplicate transition ({from}, {a})")));
            }
            *slot = Some(index(to)?);
        }
        let delta = delta
            .into_iter()
            .enumerate()
            .map(|(s, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(a, t)| {
                        t.ok_or_else(|| {
                            Error::Invariant(format!(
                                "transition function is not total at ({}, {})",
                                states[s], alphabet[a]
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let init = index(init)?;
        let accepting = accepting
            .iter()
            .map(|s| index(s))
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(Self {
            states,
            alphabet,
            delta,
            init,
            accepting,
        })
    }

    /// Convenience constructor from string slices.
    pub fn from_table(
        states: &[&str],
        alphabet: &[&str],
        transitions: &[(&str, &str, &str)],
        init: &str,
        accepting: &[&str],
    ) -> Result<Self> {
        Self::new(
            states.iter().map(|s| s.to_string()).collect(),
            alphabet.iter().map(|&a| Symbol::from(a)).collect(),
            &transitions
                .iter()
                .map(|&(f, a, t)| (f.to_string(), Symbol::from(a), t.to_string()))
                .collect::<Vec<_>>(),
            init,
            &accepting.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        )
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.accepting
    }

    pub fn next(&self, state: usize, letter: usize) -> usize {
        self.delta[state][letter]
    }

    /// `(from, symbol, to)` triples in state-major order.
    pub fn transitions(&self) -> Vec<(String, Symbol, String)> {
        let mut out = Vec::new();
        for (s, row) in self.delta.iter().enumerate() {
            for (a, &t) in row.iter().enumerate() {
                out.push((
                    self.states[s].clone(),
                    self.alphabet[a].clone(),
                    self.states[t].clone(),
                ));
            }
        }
        out
    }

    fn letter(&self, a: &Symbol) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|s| s == a)
            .ok_or_else(|| Error::UnknownSymbol(a.to_string()))
    }

    pub fn accepts(&self, w: &Word) -> Result<bool> {
        let mut s = self.init;
        for a in w {
            s = self.delta[s][self.letter(a)?];
        }
        Ok(self.accepting.contains(&s))
    }

    /// Boolean transition matrix `M_a` with `(M_a)_{ij} = 1` iff `δ(i, a) = j`.
    pub fn letter_matrix(&self, a: &Symbol) -> Result<ComplexMatrix> {
        let l = self.letter(a)?;
        let n = self.states.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (s, row) in self.delta.iter().enumerate() {
            m[(s, row[l])] = ONE;
        }
        Ok(m)
    }

    fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.init]);
        seen[self.init] = true;
        let mut order = Vec::new();
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for &t in &self.delta[s] {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        order.sort_unstable();
        order
    }

    /// Minimal equivalent automaton: unreachable states dropped, then
    /// equivalent states merged by partition refinement.
    pub fn minimize(&self) -> Dfa {
        let reachable = self.reachable();
        let mut block: BTreeMap<usize, usize> = reachable
            .iter()
            .map(|&s| (s, usize::from(self.accepting.contains(&s))))
            .collect();
        loop {
            let mut signatures: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
            let mut next: BTreeMap<usize, usize> = BTreeMap::new();
            for &s in &reachable {
                let sig = (
                    block[&s],
                    self.delta[s].iter().map(|t| block[t]).collect::<Vec<_>>(),
                );
                let fresh = signatures.len();
                let id = *signatures.entry(sig).or_insert(fresh);
                next.insert(s, id);
            }
            let before = block.values().collect::<BTreeSet<_>>().len();
            let after = signatures.len();
            block = next;
            if after == before {
                break;
            }
        }
        let n_blocks = block.values().collect::<BTreeSet<_>>().len();
        let mut representative = vec![usize::MAX; n_blocks];
        for (&s, &b) in &block {
            if representative[b] == usize::MAX {
                representative[b] = s;
            }
        }
        let states = representative
            .iter()
            .map(|&s| self.states[s].clone())
            .collect();
        let delta = representative
            .iter()
            .map(|&s| self.delta[s].iter().map(|t| block[t]).collect())
            .collect();
        let accepting = representative
            .iter()
            .enumerate()
            .filter(|(_, s)| self.accepting.contains(s))
            .map(|(b, _)| b)
            .collect();
        Dfa {
            states,
            alphabet: self.alphabet.clone(),
            delta,
            init: block[&self.init],
            accepting,
        }
    }
}

/// The DFA as a generalized quantum automaton with Boolean transition
/// matrices; `f(w)` is exactly the characteristic function of the language.
pub fn embed_dfa(d: &Dfa) -> Result<Qfa> {
    let n = d.states.len();
    let transitions = d
        .alphabet
        .iter()
        .map(|a| Ok((a.clone(), d.letter_matrix(a)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let accepting: Vec<usize> = d.accepting.iter().copied().collect();
    Qfa::new(
        d.alphabet.clone(),
        ComplexVector::basis(n, d.init),
        transitions,
        OrthonormalBasis::standard(n, &accepting)?,
        true,
    )
}

/// True iff the transition monoid of the minimal automaton is a group, i.e.
/// every letter permutes the minimal states. A false answer means the
/// characteristic function is not recognized by any unitary automaton.
pub fn monoid_is_group(d: &Dfa) -> bool {
    let m = d.minimize();
    (0..m.alphabet.len()).all(|a| {
        let image: BTreeSet<usize> = m.delta.iter().map(|row| row[a]).collect();
        image.len() == m.states.len()
    })
}

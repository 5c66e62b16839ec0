//! Sums of grammars and interference between sub-grammars.

use std::collections::BTreeSet;

use crate::algebra::{phase, real, Complex, ComplexVector};
use crate::error::{Error, Result};
use crate::word::Symbol;

use super::{accumulate, GSymbol, ProductionMap, QuantumGrammar};

/// An ordinary context-free grammar given by its set of allowed productions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalGrammar {
    pub variables: Vec<String>,
    pub terminals: Vec<Symbol>,
    pub initial: String,
    pub productions: Vec<(String, Vec<GSymbol>)>,
}

impl ClassicalGrammar {
    /// A rhs name is a terminal if listed in `terminals`, otherwise a variable.
    pub fn from_rules(
        variables: &[&str],
        terminals: &[&str],
        initial: &str,
        rules: &[(&str, &[&str])],
    ) -> Self {
        let terms: BTreeSet<&str> = terminals.iter().copied().collect();
        Self {
            variables: variables.iter().map(|s| s.to_string()).collect(),
            terminals: terminals.iter().map(|&t| Symbol::from(t)).collect(),
            initial: initial.to_string(),
            productions: rules
                .iter()
                .map(|(lhs, rhs)| {
                    let rhs = rhs
                        .iter()
                        .map(|s| {
                            if terms.contains(s) {
                                GSymbol::term(*s)
                            } else {
                                GSymbol::var(*s)
                            }
                        })
                        .collect();
                    (lhs.to_string(), rhs)
                })
                .collect(),
        }
    }
}

/// Amplitude 1 on every allowed production. For an unambiguous grammar the
/// result has `c(w) = f(w) = χ_L(w)`; ambiguity is not checked.
pub fn embed_unambiguous(g: &ClassicalGrammar) -> Result<QuantumGrammar> {
    let mut map = ProductionMap::new();
    for (lhs, rhs) in &g.productions {
        if map.contains_key(&(lhs.clone(), rhs.clone())) {
            continue;
        }
        accumulate(&mut map, lhs, rhs.clone(), ComplexVector::ones(1));
    }
    QuantumGrammar::from_map(
        g.variables.clone(),
        g.terminals.clone(),
        g.initial.clone(),
        1,
        map,
    )
}

fn rename(v: &str, tag: usize) -> String {
    format!("{v}:{tag}")
}

/// Copies `g`'s productions into `map` with variables tagged `:tag` and the
/// amplitudes placed at `offset..offset+dim` of a `total`-long vector.
fn embed_into(
    map: &mut ProductionMap,
    variables: &mut Vec<String>,
    g: &QuantumGrammar,
    tag: usize,
    offset: usize,
    total: usize,
) {
    variables.extend(g.variables().iter().map(|v| rename(v, tag)));
    for p in g.active_productions() {
        let rhs = p
            .rhs
            .iter()
            .map(|s| match s {
                GSymbol::Var(v) => GSymbol::var(rename(v, tag)),
                t => t.clone(),
            })
            .collect();
        let mut amps = vec![Complex::new(0.0, 0.0); total];
        amps[offset..offset + g.dimensionality()].copy_from_slice(p.amplitudes.entries());
        accumulate(map, &rename(&p.lhs, tag), rhs, ComplexVector::new(amps));
    }
}

fn start_name(terminals: &[Symbol]) -> String {
    let mut name = "K".to_string();
    while terminals.iter().any(|t| t.as_str() == name) {
        name.push('\'');
    }
    name
}

/// Grammar with `f = f₁ + f₂`: the amplitude coordinates are stacked and a
/// new initial variable rewrites to either old initial with amplitude 1.
pub fn grammar_sum(g1: &QuantumGrammar, g2: &QuantumGrammar) -> Result<QuantumGrammar> {
    if !g1.same_terminals(g2) {
        return Err(Error::AlphabetMismatch("grammars have different terminals".into()));
    }
    let (m, n) = (g1.dimensionality(), g2.dimensionality());
    let total = m + n;
    let start = start_name(g1.terminals());
    let mut variables = vec![start.clone()];
    let mut map = ProductionMap::new();
    embed_into(&mut map, &mut variables, g1, 1, 0, total);
    embed_into(&mut map, &mut variables, g2, 2, m, total);
    for (g, tag) in [(g1, 1), (g2, 2)] {
        accumulate(
            &mut map,
            &start,
            vec![GSymbol::var(rename(g.initial(), tag))],
            ComplexVector::ones(total),
        );
    }
    QuantumGrammar::from_map(variables, g1.terminals().to_vec(), start, total, map)
}

/// Superposes one-dimensional grammars: the new initial variable rewrites to
/// the `i`-th old initial variable with amplitude `weights[i]`.
fn interfere(grammars: &[&QuantumGrammar], weights: &[Complex]) -> Result<QuantumGrammar> {
    for g in grammars {
        if g.dimensionality() != 1 {
            return Err(Error::InvalidArgument(format!(
                "interference needs one-dimensional grammars, got dimensionality {}",
                g.dimensionality()
            )));
        }
        if !g.same_terminals(grammars[0]) {
            return Err(Error::AlphabetMismatch("grammars have different terminals".into()));
        }
    }
    let start = start_name(grammars[0].terminals());
    let mut variables = vec![start.clone()];
    let mut map = ProductionMap::new();
    for (i, (g, w)) in grammars.iter().zip(weights).enumerate() {
        embed_into(&mut map, &mut variables, g, i + 1, 0, 1);
        accumulate(
            &mut map,
            &start,
            vec![GSymbol::var(rename(g.initial(), i + 1))],
            ComplexVector::new(vec![*w]),
        );
    }
    QuantumGrammar::from_map(variables, grammars[0].terminals().to_vec(), start, 1, map)
}

/// `f = |c₁ − c₂|²`: 1 on words in exactly one of two unambiguous languages.
pub fn symmetric_difference(g1: &QuantumGrammar, g2: &QuantumGrammar) -> Result<QuantumGrammar> {
    interfere(&[g1, g2], &[real(1.0), real(-1.0)])
}

/// Weights `1, ω, ω²` with `ω = e^{2πi/3}`: 1 on words in one or two of the
/// languages, 0 on words in none or all three.
pub fn three_way_interference(
    g1: &QuantumGrammar,
    g2: &QuantumGrammar,
    g3: &QuantumGrammar,
) -> Result<QuantumGrammar> {
    let third = 2.0 * std::f64::consts::PI / 3.0;
    interfere(&[g1, g2, g3], &[real(1.0), phase(third), phase(2.0 * third)])
}

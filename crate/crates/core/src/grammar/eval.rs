//! Word amplitudes of quantum grammars.
//!
//! Greibach-form grammars are evaluated by running the derivation as a
//! stack machine for exactly `|w|` steps. Every other grammar goes through an
//! inside-style dynamic program over spans that handles ε-productions and
//! unit productions, provided no variable can rewrite into itself without
//! consuming input.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::algebra::{Complex, ComplexVector, ZERO};
use crate::error::{Error, Result};
use crate::word::Word;

use super::{GSymbol, QuantumGrammar};

#[derive(Clone, Copy)]
enum Sym {
    Var(usize),
    Term(usize),
}

struct Compiled {
    n_vars: usize,
    initial: usize,
    dim: usize,
    /// `(lhs, rhs, amplitudes)` for productions with a nonzero amplitude.
    prods: Vec<(usize, Vec<Sym>, Vec<Complex>)>,
}

impl Compiled {
    fn new(g: &QuantumGrammar) -> Self {
        let var_index: BTreeMap<&str, usize> = g
            .variables()
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let term_index: BTreeMap<&str, usize> = g
            .terminals()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let prods = g
            .active_productions()
            .map(|p| {
                let rhs = p
                    .rhs
                    .iter()
                    .map(|s| match s {
                        GSymbol::Var(v) => Sym::Var(var_index[v.as_str()]),
                        GSymbol::Term(t) => Sym::Term(term_index[t.as_str()]),
                    })
                    .collect();
                (var_index[p.lhs.as_str()], rhs, p.amplitudes.entries().to_vec())
            })
            .collect();
        Self {
            n_vars: g.variables().len(),
            initial: var_index[g.initial()],
            dim: g.dimensionality(),
            prods,
        }
    }
}

fn encode_word(g: &QuantumGrammar, w: &Word) -> Result<Vec<usize>> {
    w.iter()
        .map(|a| {
            g.terminals()
                .iter()
                .position(|t| t == a)
                .ok_or_else(|| Error::UnknownSymbol(a.to_string()))
        })
        .collect()
}

fn nullable(c: &Compiled) -> Vec<bool> {
    let mut null = vec![false; c.n_vars];
    loop {
        let mut changed = false;
        for (lhs, rhs, _) in &c.prods {
            if !null[*lhs]
                && rhs
                    .iter()
                    .all(|s| matches!(s, Sym::Var(u) if null[*u]))
            {
                null[*lhs] = true;
                changed = true;
            }
        }
        if !changed {
            return null;
        }
    }
}

/// Variables in an order where `v` comes after every `u` it can rewrite
/// into while every sibling of `u` derives ε. A cycle in that relation means
/// an unbounded number of derivations for one word.
fn same_span_order(c: &Compiled, null: &[bool]) -> Result<Vec<usize>> {
    let mut edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); c.n_vars];
    for (lhs, rhs, _) in &c.prods {
        for (i, s) in rhs.iter().enumerate() {
            if let Sym::Var(u) = s {
                let others_null = rhs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .all(|(_, t)| matches!(t, Sym::Var(x) if null[*x]));
                if others_null {
                    edges[*lhs].insert(*u);
                }
            }
        }
    }
    // Kahn's algorithm on the reversed edges: dependencies first.
    let mut pending: Vec<usize> = edges.iter().map(BTreeSet::len).collect();
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); c.n_vars];
    for (v, es) in edges.iter().enumerate() {
        for &u in es {
            dependents[u].push(v);
        }
    }
    let mut queue: VecDeque<usize> = (0..c.n_vars).filter(|&v| pending[v] == 0).collect();
    let mut order = Vec::with_capacity(c.n_vars);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &v in &dependents[u] {
            pending[v] -= 1;
            if pending[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    if order.len() < c.n_vars {
        return Err(Error::UnsupportedGrammar(
            "a cycle of productions can rewrite a variable into itself without consuming input"
                .into(),
        ));
    }
    Ok(order)
}

/// Amplitude vector of `w` by dynamic programming over spans.
pub fn span_amplitudes(g: &QuantumGrammar, w: &Word) -> Result<ComplexVector> {
    let c = Compiled::new(g);
    let word = encode_word(g, w)?;
    let null = nullable(&c);
    let order = same_span_order(&c, &null)?;
    let n = word.len();
    let dim = c.dim;
    let nv = c.n_vars;
    let width = n + 1;

    // inside[(i, j, v)] = amplitude of v deriving w[i..j]
    let mut inside = vec![ZERO; width * width * nv * dim];
    let at = |i: usize, j: usize, v: usize| ((i * width + j) * nv + v) * dim;

    let mut by_lhs: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut offset = Vec::with_capacity(c.prods.len());
    let mut slots = 0;
    for (r, (lhs, rhs, _)) in c.prods.iter().enumerate() {
        by_lhs[*lhs].push(r);
        offset.push(slots);
        slots += rhs.len() + 1;
    }
    // items[(slot of production r after t symbols, p)] = amplitude of the
    // first t symbols deriving w[i..p], for the current start i
    let mut items = vec![ZERO; slots * width * dim];
    let item = |slot: usize, p: usize| (slot * width + p) * dim;
    let mut acc = vec![ZERO; dim];

    for i in (0..=n).rev() {
        for x in items.iter_mut() {
            *x = ZERO;
        }
        for (r, (_, _, amps)) in c.prods.iter().enumerate() {
            let base = item(offset[r], i);
            items[base..base + dim].copy_from_slice(amps);
        }
        for j in i..=n {
            // Two passes: the first settles inside(i, j, ·) in dependency
            // order, the second recomputes every item ending at j with final
            // values so that longer spans can extend them.
            for pass in 0..2 {
                let vars: Vec<usize> = if pass == 0 { order.clone() } else { (0..nv).collect() };
                for &v in &vars {
                    for &r in &by_lhs[v] {
                        let rhs = &c.prods[r].1;
                        for t in 1..=rhs.len() {
                            for x in acc.iter_mut() {
                                *x = ZERO;
                            }
                            match rhs[t - 1] {
                                Sym::Term(a) => {
                                    if j > i && word[j - 1] == a {
                                        let src = item(offset[r] + t - 1, j - 1);
                                        acc.copy_from_slice(&items[src..src + dim]);
                                    }
                                }
                                Sym::Var(u) => {
                                    for p in i..=j {
                                        let src = item(offset[r] + t - 1, p);
                                        let ins = at(p, j, u);
                                        for k in 0..dim {
                                            acc[k] += items[src + k] * inside[ins + k];
                                        }
                                    }
                                }
                            }
                            let dst = item(offset[r] + t, j);
                            items[dst..dst + dim].copy_from_slice(&acc);
                        }
                    }
                    if pass == 0 {
                        let dst = at(i, j, v);
                        for x in inside[dst..dst + dim].iter_mut() {
                            *x = ZERO;
                        }
                        for &r in &by_lhs[v] {
                            let src = item(offset[r] + c.prods[r].1.len(), j);
                            for k in 0..dim {
                                inside[dst + k] += items[src + k];
                            }
                        }
                    }
                }
            }
        }
    }
    let src = at(0, n, c.initial);
    Ok(ComplexVector::new(inside[src..src + dim].to_vec()))
}

type Expansion<'a> = (Vec<usize>, &'a [Complex]);

/// Amplitude vector of `w` for a Greibach-form grammar: each step consumes
/// one input symbol and replaces the top variable of the sentential stack.
pub fn gnf_amplitudes(g: &QuantumGrammar, w: &Word) -> Result<ComplexVector> {
    if !g.is_greibach() {
        return Err(Error::Precondition("grammar is not in Greibach form".into()));
    }
    let c = Compiled::new(g);
    let word = encode_word(g, w)?;
    let dim = c.dim;
    if word.is_empty() {
        let mut out = vec![ZERO; dim];
        for (lhs, rhs, amps) in &c.prods {
            if *lhs == c.initial && rhs.is_empty() {
                out.copy_from_slice(amps);
            }
        }
        return Ok(ComplexVector::new(out));
    }
    // (variable, terminal) -> [(pushed variables in stack order, amplitudes)]
    let mut table: BTreeMap<(usize, usize), Vec<Expansion>> = BTreeMap::new();
    for (lhs, rhs, amps) in &c.prods {
        if let Some((Sym::Term(a), rest)) = rhs.split_first() {
            let pushed = rest
                .iter()
                .rev()
                .map(|s| match s {
                    Sym::Var(u) => *u,
                    Sym::Term(_) => unreachable!("checked Greibach form"),
                })
                .collect();
            table.entry((*lhs, *a)).or_default().push((pushed, amps));
        }
    }
    // stacks keep the top at the end
    let mut states: BTreeMap<Vec<usize>, Vec<Complex>> = BTreeMap::new();
    states.insert(vec![c.initial], vec![Complex::new(1.0, 0.0); dim]);
    for (step, &a) in word.iter().enumerate() {
        let remaining = word.len() - step - 1;
        let mut next: BTreeMap<Vec<usize>, Vec<Complex>> = BTreeMap::new();
        for (stack, amp) in &states {
            let Some((&top, rest)) = stack.split_last() else {
                continue;
            };
            let Some(options) = table.get(&(top, a)) else {
                continue;
            };
            for (pushed, amps) in options {
                // every variable yields at least one symbol
                if rest.len() + pushed.len() > remaining {
                    continue;
                }
                let mut key = rest.to_vec();
                key.extend_from_slice(pushed);
                let slot = next.entry(key).or_insert_with(|| vec![ZERO; dim]);
                for k in 0..dim {
                    slot[k] += amp[k] * amps[k];
                }
            }
        }
        states = next;
    }
    Ok(ComplexVector::new(
        states.remove(&Vec::new()).unwrap_or_else(|| vec![ZERO; dim]),
    ))
}

/// Amplitude vector `c(w)`: per coordinate, the sum over all derivations of
/// `w` of the product of production amplitudes.
pub fn derive_amplitudes(g: &QuantumGrammar, w: &Word) -> Result<ComplexVector> {
    if g.is_greibach() {
        gnf_amplitudes(g, w)
    } else {
        span_amplitudes(g, w)
    }
}

/// `f(w) = Σ_k |c_k(w)|²`.
pub fn f_of_word(g: &QuantumGrammar, w: &Word) -> Result<f64> {
    Ok(derive_amplitudes(g, w)?.norm_sqr())
}

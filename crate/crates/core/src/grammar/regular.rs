//! Regular quantum grammars and their correspondence with automata.

use std::collections::BTreeMap;

use crate::algebra::{ComplexMatrix, ComplexVector, OrthonormalBasis, ONE, ZERO};
use crate::error::{Error, Result};
use crate::qfa::Qfa;

use super::{
    accumulate, eliminate_unit_productions, fresh_name, taken_names, GSymbol, ProductionMap,
    QuantumGrammar,
};

/// Rewrites a regular grammar so that every production is `v → a u` or
/// `v → a`, keeping only an ε-production on a start that occurs on no rhs.
///
/// Unit productions are resummed first. A production `u → w v` combined
/// with `v → ε` contributes `u → w`, after which inner ε-productions are
/// dropped. Longer terminal prefixes become chains of fresh variables.
pub fn normalize_regular(g: &QuantumGrammar) -> Result<QuantumGrammar> {
    if !g.is_regular() {
        return Err(Error::Precondition("grammar is not regular".into()));
    }
    if g.is_normalized_regular() {
        return Ok(g.clone());
    }
    let g = eliminate_unit_productions(g)?;
    let dim = g.dimensionality();
    let eps: BTreeMap<&str, &ComplexVector> = g
        .active_productions()
        .filter(|p| p.is_epsilon())
        .map(|p| (p.lhs.as_str(), &p.amplitudes))
        .collect();

    let mut taken = taken_names(&g);
    let mut variables = g.variables().to_vec();
    let mut initial = g.initial().to_string();
    let mut folded = ProductionMap::new();
    for p in g.active_productions() {
        if p.is_epsilon() {
            if p.lhs == initial {
                accumulate(&mut folded, &p.lhs, vec![], p.amplitudes.clone());
            }
            continue;
        }
        accumulate(&mut folded, &p.lhs, p.rhs.clone(), p.amplitudes.clone());
        if let Some(GSymbol::Var(v)) = p.rhs.last() {
            if let Some(e) = eps.get(v.as_str()) {
                if p.rhs.len() > 1 {
                    let word = p.rhs[..p.rhs.len() - 1].to_vec();
                    accumulate(&mut folded, &p.lhs, word, p.amplitudes.hadamard(e));
                }
            }
        }
    }
    let start_used = folded
        .keys()
        .any(|(_, rhs)| rhs.iter().any(|s| s.as_var() == Some(initial.as_str())));
    if start_used && folded.contains_key(&(initial.clone(), vec![])) {
        let start = fresh_name(&format!("{initial}_0"), &mut taken);
        variables.insert(0, start.clone());
        let copies: Vec<_> = folded
            .iter()
            .filter(|((lhs, _), _)| *lhs == initial)
            .map(|((_, rhs), amps)| (rhs.clone(), amps.clone()))
            .collect();
        folded.remove(&(initial.clone(), vec![]));
        for (rhs, amps) in copies {
            accumulate(&mut folded, &start, rhs, amps);
        }
        initial = start;
    }

    let ones = ComplexVector::ones(dim);
    let mut map = ProductionMap::new();
    for ((lhs, rhs), amps) in folded {
        if rhs.len() <= 1 || (rhs.len() == 2 && !rhs[1].is_term()) {
            accumulate(&mut map, &lhs, rhs, amps);
            continue;
        }
        let (body, tail) = match rhs.last() {
            Some(GSymbol::Var(_)) => (&rhs[..rhs.len() - 1], Some(rhs[rhs.len() - 1].clone())),
            _ => (&rhs[..], None),
        };
        let mut from = lhs.clone();
        let mut amps = amps;
        for (i, a) in body.iter().enumerate() {
            let last = i + 1 == body.len();
            let next = if last {
                tail.clone()
            } else {
                let name = fresh_name(&format!("{lhs}_{}", body.len() - i - 1), &mut taken);
                variables.push(name.clone());
                Some(GSymbol::var(name))
            };
            let mut out = vec![a.clone()];
            out.extend(next.clone());
            accumulate(&mut map, &from, out, amps);
            amps = ones.clone();
            if let Some(GSymbol::Var(n)) = next {
                from = n;
            }
        }
    }
    QuantumGrammar::from_map(variables, g.terminals().to_vec(), initial, dim, map)
}

/// One `(m+1)`-state generalized machine per amplitude coordinate, combined
/// by direct sum: state `i < m` stands for variable `v_i`, state `m` for a
/// finished derivation, and `(U_a)_{ij} = c(v_i → a v_j)`,
/// `(U_a)_{im} = c(v_i → a)`. An `I → ε` amplitude is placed on the finished
/// state of the initial vector so that `f(ε)` is reproduced as well.
pub fn regular_to_qfa(g: &QuantumGrammar) -> Result<Qfa> {
    if !g.is_normalized_regular() {
        return Err(Error::Precondition(
            "grammar must be normalized: every production v -> a u or v -> a".into(),
        ));
    }
    let vars = g.variables();
    let m = vars.len();
    let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let init = index[g.initial()];
    let mut s_init = Vec::new();
    let mut accept = Vec::new();
    let mut blocks: BTreeMap<_, Vec<ComplexMatrix>> = BTreeMap::new();
    for k in 0..g.dimensionality() {
        let mut s = vec![ZERO; m + 1];
        s[init] = ONE;
        s[m] = g.amplitude(g.initial(), &[])[k];
        s_init.extend(s);
        accept.push(k * (m + 1) + m);
        for a in g.terminals() {
            let mut u = ComplexMatrix::zeros(m + 1, m + 1);
            for p in g.active_productions() {
                let i = index[p.lhs.as_str()];
                match p.rhs.as_slice() {
                    [GSymbol::Term(t)] if t == a => u[(i, m)] = p.amplitudes[k],
                    [GSymbol::Term(t), GSymbol::Var(v)] if t == a => {
                        u[(i, index[v.as_str()])] = p.amplitudes[k]
                    }
                    _ => {}
                }
            }
            blocks.entry(a.clone()).or_default().push(u);
        }
    }
    let size = g.dimensionality() * (m + 1);
    let transitions = blocks
        .into_iter()
        .map(|(a, parts)| {
            let mut it = parts.into_iter();
            let first = it.next().expect("dimensionality >= 1");
            (a, it.fold(first, |acc, u| acc.direct_sum(&u)))
        })
        .collect();
    Qfa::new(
        g.terminals().to_vec(),
        ComplexVector::new(s_init),
        transitions,
        OrthonormalBasis::standard(size, &accept)?,
        true,
    )
}

/// Regular grammar with one variable per basis state:
/// `c(I → v_j) = (s_init)_j`, `c(v_i → a v_j) = (U_a)_{ij}` in every
/// coordinate, and `c_k(v_j → ε) = conj((h_k)_j)` so that the `k`-th
/// coordinate of `c(w)` is `⟨h_k | s_init U_w⟩`.
pub fn qfa_to_regular_grammar(q: &Qfa) -> Result<QuantumGrammar> {
    let n = q.dim();
    let dim = q.accept_basis().len().max(1);
    let mut taken: std::collections::BTreeSet<String> =
        q.alphabet().iter().map(|a| a.to_string()).collect();
    let initial = fresh_name("I", &mut taken);
    let states: Vec<String> = (0..n).map(|j| fresh_name(&format!("v{j}"), &mut taken)).collect();
    let uniform = |z| ComplexVector::new(vec![z; dim]);
    let mut map = ProductionMap::new();
    for (j, v) in states.iter().enumerate() {
        let s = q.s_init()[j];
        if s != ZERO {
            accumulate(&mut map, &initial, vec![GSymbol::var(v.clone())], uniform(s));
        }
        let mut eps = vec![ZERO; dim];
        for (k, h) in q.accept_basis().vectors().iter().enumerate() {
            eps[k] = h[j].conj();
        }
        let eps = ComplexVector::new(eps);
        if !eps.is_zero() {
            accumulate(&mut map, v, vec![], eps);
        }
    }
    for (a, u) in q.transitions() {
        for (i, vi) in states.iter().enumerate() {
            for (j, vj) in states.iter().enumerate() {
                let z = u[(i, j)];
                if z != ZERO {
                    accumulate(
                        &mut map,
                        vi,
                        vec![GSymbol::Term(a.clone()), GSymbol::var(vj.clone())],
                        uniform(z),
                    );
                }
            }
        }
    }
    let mut variables = vec![initial.clone()];
    variables.extend(states);
    QuantumGrammar::from_map(variables, q.alphabet().to_vec(), initial, dim, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{c, real};
    use crate::catalog;
    use crate::grammar::{derive_amplitudes, f_of_word};
    use crate::qfa::embed_dfa;
    use crate::word::{alphabet, words_up_to, Word};
    use rand::SeedableRng;

    #[test]
    fn shortest_chain() {
        let q = c(0.2, -0.7);
        let g = QuantumGrammar::from_rules(&["I"], &["a", "b"], "I", 1, &[("I", &["a", "b", "I"], vec![q])])
            .unwrap();
        let h = normalize_regular(&g).unwrap();
        assert!(h.is_normalized_regular());
        assert_eq!(h.productions().len(), 2);
        assert_eq!(h.amplitude("I", &[GSymbol::term("a"), GSymbol::var("I_1")])[0], q);
        assert_eq!(h.amplitude("I_1", &[GSymbol::term("b"), GSymbol::var("I")])[0], ONE);
    }

    #[test]
    fn normalized_input_unchanged() {
        let g = QuantumGrammar::from_rules(
            &["I"],
            &["a"],
            "I",
            1,
            &[("I", &["a", "I"], vec![real(0.5)]), ("I", &["a"], vec![ONE])],
        )
        .unwrap();
        assert_eq!(normalize_regular(&g).unwrap(), g);
    }

    #[test]
    fn epsilon_folding_and_start_separation() {
        // I -> ab I | ε, with I on a right-hand side
        let g = QuantumGrammar::from_rules(
            &["I", "X"],
            &["a", "b"],
            "I",
            2,
            &[
                ("I", &["a", "b", "I"], vec![real(0.5), c(0.0, 0.5)]),
                ("I", &["X"], vec![real(0.3), ONE]),
                ("X", &["b"], vec![ONE, real(2.0)]),
                ("I", &[], vec![ONE, real(-1.0)]),
            ],
        )
        .unwrap();
        let h = normalize_regular(&g).unwrap();
        assert!(h.is_normalized_regular());
        for w in words_up_to(&alphabet(&["a", "b"]), 6) {
            let x = derive_amplitudes(&g, &w).unwrap();
            let y = derive_amplitudes(&h, &w).unwrap();
            assert!(x.max_abs_diff(&y) < 1e-12, "{w}");
        }
    }

    #[test]
    fn a_plus() {
        let g = QuantumGrammar::from_rules(
            &["I"],
            &["a", "b"],
            "I",
            1,
            &[("I", &["a", "I"], vec![ONE]), ("I", &["a"], vec![ONE])],
        )
        .unwrap();
        let q = regular_to_qfa(&g).unwrap();
        for w in words_up_to(&alphabet(&["a", "b"]), 5) {
            let expected = if !w.is_empty() && w.count("b") == 0 { 1.0 } else { 0.0 };
            assert!((q.accept_probability(&w).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn two_coordinates_add() {
        let (c1, c2) = (c(0.6, 0.0), c(0.0, 0.5));
        let g = QuantumGrammar::from_rules(&["I"], &["a"], "I", 2, &[("I", &["a"], vec![c1, c2])])
            .unwrap();
        let q = regular_to_qfa(&g).unwrap();
        let p = q.accept_probability(&Word::from_chars("a")).unwrap();
        assert!((p - (c1.norm_sqr() + c2.norm_sqr())).abs() < 1e-12);
        assert_eq!(q.accept_probability(&Word::from_chars("aa")).unwrap(), 0.0);
    }

    #[test]
    fn empty_grammar_gives_zero() {
        let g = QuantumGrammar::new(vec!["I".into()], alphabet(&["a"]), "I", 1, vec![]).unwrap();
        let q = regular_to_qfa(&g).unwrap();
        for w in words_up_to(&alphabet(&["a"]), 4) {
            assert_eq!(q.accept_probability(&w).unwrap(), 0.0);
        }
    }

    #[test]
    fn unnormalized_rejected() {
        let g = catalog::dyck_grammar();
        assert!(matches!(regular_to_qfa(&g), Err(Error::Precondition(_))));
    }

    #[test]
    fn measurement_machine_to_grammar() {
        let q = catalog::measurement_qfa(0).unwrap();
        let g = qfa_to_regular_grammar(&q).unwrap();
        assert!(g.is_regular());
        for w in words_up_to(&alphabet(&["a", "b"]), 4) {
            assert!((f_of_word(&g, &w).unwrap() - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn dfa_to_grammar() {
        let d = catalog::bb_forbidden_dfa();
        let g = qfa_to_regular_grammar(&embed_dfa(&d).unwrap()).unwrap();
        for w in words_up_to(d.alphabet(), 6) {
            let expected = if d.accepts(&w).unwrap() { 1.0 } else { 0.0 };
            assert!((f_of_word(&g, &w).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_random_machines() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
        let ab = alphabet(&["a", "b"]);
        for _ in 0..5 {
            let q = crate::random::random_qfa(&mut rng, 2, &ab, 1);
            let g = qfa_to_regular_grammar(&q).unwrap();
            let back = regular_to_qfa(&normalize_regular(&g).unwrap()).unwrap();
            for w in words_up_to(&ab, 5) {
                let p = q.accept_probability(&w).unwrap();
                assert!((f_of_word(&g, &w).unwrap() - p).abs() < 1e-12);
                assert!((back.accept_probability(&w).unwrap() - p).abs() < 1e-12);
            }
        }
    }
}

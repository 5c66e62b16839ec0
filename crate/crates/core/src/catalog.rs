//! Small named machines and grammars used by the demos and tests.

use std::collections::BTreeMap;

use crate::algebra::{c, ComplexMatrix, ComplexVector, OrthonormalBasis, ONE};
use crate::error::Result;
use crate::grammar::QuantumGrammar;
use crate::qfa::{Dfa, Qfa};
use crate::word::alphabet;

/// Two-state machine over `{a, b}` that never moves: `s_init = (√3/2, −i/2)`
/// and acceptance on basis vector `accept_index`, so `f ≡ 3/4` or `f ≡ 1/4`.
pub fn measurement_qfa(accept_index: usize) -> Result<Qfa> {
    let letters = alphabet(&["a", "b"]);
    let transitions: BTreeMap<_, _> = letters
        .iter()
        .map(|a| (a.clone(), ComplexMatrix::identity(2)))
        .collect();
    Qfa::new(
        letters,
        ComplexVector::new(vec![c(3f64.sqrt() / 2.0, 0.0), c(0.0, -0.5)]),
        transitions,
        OrthonormalBasis::standard(2, &[accept_index])?,
        false,
    )
}

/// Words over `{a, b}` with no two consecutive `b`s.
pub fn bb_forbidden_dfa() -> Dfa {
    Dfa::from_table(
        &["A", "B", "R"],
        &["a", "b"],
        &[
            ("A", "a", "A"),
            ("A", "b", "B"),
            ("B", "a", "A"),
            ("B", "b", "R"),
            ("R", "a", "R"),
            ("R", "b", "R"),
        ],
        "A",
        &["A", "B"],
    )
    .expect("valid table")
}

/// Words over `{a, b}` with an even number of `a`s.
pub fn parity_dfa() -> Dfa {
    Dfa::from_table(
        &["even", "odd"],
        &["a", "b"],
        &[
            ("even", "a", "odd"),
            ("even", "b", "even"),
            ("odd", "a", "even"),
            ("odd", "b", "odd"),
        ],
        "even",
        &["even"],
    )
    .expect("valid table")
}

/// Words over `{a}` whose length is divisible by three.
pub fn mod3_dfa() -> Dfa {
    Dfa::from_table(
        &["0", "1", "2"],
        &["a"],
        &[("0", "a", "1"), ("1", "a", "2"), ("2", "a", "0")],
        "0",
        &["0"],
    )
    .expect("valid table")
}

fn grammar(
    variables: &[&str],
    terminals: &[&str],
    rules: &[(&str, &[&str])],
) -> QuantumGrammar {
    let rules: Vec<_> = rules.iter().map(|(l, r)| (*l, *r, vec![ONE])).collect();
    QuantumGrammar::from_rules(variables, terminals, variables[0], 1, &rules)
        .expect("valid grammar")
}

/// Dyck language over `a` (open) and `b` (close): `I → a I b I | ε`.
pub fn dyck_grammar() -> QuantumGrammar {
    grammar(&["I"], &["a", "b"], &[("I", &["a", "I", "b", "I"]), ("I", &[])])
}

/// The Dyck language with the empty word produced only by a start variable
/// that occurs on no right-hand side:
/// `S → ε | D`, `D → a b | a D b | a b D | a D b D`.
pub fn dyck_grammar_separated() -> QuantumGrammar {
    grammar(
        &["S", "D"],
        &["a", "b"],
        &[
            ("S", &[]),
            ("S", &["D"]),
            ("D", &["a", "b"]),
            ("D", &["a", "D", "b"]),
            ("D", &["a", "b", "D"]),
            ("D", &["a", "D", "b", "D"]),
        ],
    )
}

/// `{aⁱ bⁱ cʲ}`: `I → X C`, `X → a X b | ε`, `C → c C | ε`.
pub fn equal_ab_grammar() -> QuantumGrammar {
    grammar(
        &["I", "X", "C"],
        &["a", "b", "c"],
        &[
            ("I", &["X", "C"]),
            ("X", &["a", "X", "b"]),
            ("X", &[]),
            ("C", &["c", "C"]),
            ("C", &[]),
        ],
    )
}

/// `{aⁱ bʲ cʲ}`: `I → A Y`, `A → a A | ε`, `Y → b Y c | ε`.
pub fn equal_bc_grammar() -> QuantumGrammar {
    grammar(
        &["I", "A", "Y"],
        &["a", "b", "c"],
        &[
            ("I", &["A", "Y"]),
            ("A", &["a", "A"]),
            ("A", &[]),
            ("Y", &["b", "Y", "c"]),
            ("Y", &[]),
        ],
    )
}

/// `{aⁱ bⁱ cʲ} ∖ {ε}` without ε-productions.
pub fn equal_ab_grammar_nonempty() -> QuantumGrammar {
    grammar(
        &["I", "X", "C"],
        &["a", "b", "c"],
        &[
            ("I", &["X", "C"]),
            ("I", &["X"]),
            ("I", &["C"]),
            ("X", &["a", "X", "b"]),
            ("X", &["a", "b"]),
            ("C", &["c", "C"]),
            ("C", &["c"]),
        ],
    )
}

/// `{aⁱ bʲ cʲ} ∖ {ε}` without ε-productions.
pub fn equal_bc_grammar_nonempty() -> QuantumGrammar {
    grammar(
        &["I", "A", "Y"],
        &["a", "b", "c"],
        &[
            ("I", &["A", "Y"]),
            ("I", &["A"]),
            ("I", &["Y"]),
            ("A", &["a", "A"]),
            ("A", &["a"]),
            ("Y", &["b", "Y", "c"]),
            ("Y", &["b", "c"]),
        ],
    )
}

/// Three finite languages over `{a, b}` with `ab` in all of them, `a` in
/// one, `b` in two and `ba` in none.
pub fn designed_triple() -> [QuantumGrammar; 3] {
    [
        grammar(&["I"], &["a", "b"], &[("I", &["a"]), ("I", &["a", "b"])]),
        grammar(&["I"], &["a", "b"], &[("I", &["a", "b"]), ("I", &["b"])]),
        grammar(&["I"], &["a", "b"], &[("I", &["a", "b"]), ("I", &["b"]), ("I", &["b", "b"])]),
    ]
}

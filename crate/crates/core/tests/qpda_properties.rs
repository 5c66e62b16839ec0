use std::collections::BTreeSet;

use proptest::prelude::*;
use qlang::algebra::{c, Complex};
use qlang::format::{machine_from_json, machine_to_json, Machine};
use qlang::grammar::{f_of_word, to_greibach};
use qlang::qpda::{
    build_leq_qpda, grammar_to_qpda, lemma11_expand, lemma12_convert, lemma13_convert, norm_trace,
    qpda_accept_probability, qpda_run, qpda_step, qpda_to_grammar, AcceptanceMode, Action, InitEntry,
    Qpda, Rule, SparseState,
};
use qlang::random::random_word;
use qlang::word::{alphabet, words_up_to, Word};
use qlang::{QuantumGrammar, Symbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn amp(r: &mut ChaCha8Rng) -> Complex {
    c(r.random_range(-0.6..0.6), r.random_range(-0.6..0.6))
}

fn sym(s: &str) -> Symbol {
    Symbol::from(s)
}

/// Generalized machine over input `{a, b}` and stack `{x, y}` with random
/// rules and no dependence on the symbol below the top.
fn random_qpda(seed: u64, words: bool, mode: AcceptanceMode) -> Qpda {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let controls = ["p", "q"];
    let stack = ["x", "y"];
    let mut rules = Vec::new();
    for input in ["a", "b"] {
        for from in controls {
            for top in [None, Some("x"), Some("y")] {
                let mut seen = BTreeSet::new();
                for _ in 0..r.random_range(1..3) {
                    let action = match r.random_range(0..if words { 5 } else { 4 }) {
                        0 => Action::Push(sym(stack[r.random_range(0..2)])),
                        1 if top.is_some() => Action::Pop,
                        4 => {
                            let len = r.random_range(0..3);
                            Action::PushWord((0..len).map(|_| sym(stack[r.random_range(0..2)])).collect())
                        }
                        _ => Action::Stay,
                    };
                    let to = controls[r.random_range(0..2)];
                    if seen.insert((format!("{action:?}"), to)) {
                        rules.push(Rule::new(input, from, top, action, to, amp(&mut r)));
                    }
                }
            }
        }
    }
    let mut s_init = vec![InitEntry { control: "p".into(), stack: vec![], amplitude: c(1.0, 0.0) }];
    if r.random_bool(0.5) {
        s_init.push(InitEntry { control: "q".into(), stack: vec![sym("x")], amplitude: amp(&mut r) });
    }
    let accept: BTreeSet<String> = [controls[r.random_range(0..2)].to_string()].into();
    Qpda::new(
        controls.iter().map(|s| s.to_string()).collect(),
        alphabet(&["a", "b"]),
        alphabet(&stack),
        rules,
        s_init,
        accept,
        mode,
        false,
        words,
    )
    .unwrap()
}

fn mode(control_only: bool) -> AcceptanceMode {
    if control_only {
        AcceptanceMode::ControlOnly
    } else {
        AcceptanceMode::EmptyStackAndControl
    }
}

fn ab() -> Vec<Symbol> {
    alphabet(&["a", "b"])
}

fn scaled_grammar(seed: u64) -> QuantumGrammar {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let rules: Vec<(&str, &[&str], Vec<Complex>)> = vec![
        ("I", &["a", "I", "b"], vec![amp(&mut r), amp(&mut r)]),
        ("I", &["I", "I"], vec![amp(&mut r), amp(&mut r)]),
        ("I", &["a", "b"], vec![amp(&mut r), amp(&mut r)]),
        ("I", &["b"], vec![amp(&mut r), amp(&mut r)]),
    ];
    QuantumGrammar::from_rules(&["I"], &["a", "b"], "I", 2, &rules).unwrap()
}

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() < 1e-9 * (1.0 + y.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unitary_machines_conserve_norm(seed in any::<u64>(), len in 0usize..12) {
        let w = random_word(&mut ChaCha8Rng::seed_from_u64(seed), &ab(), len);
        let leq = build_leq_qpda();
        let expanded = lemma11_expand(&leq.clone().into_generalized()).unwrap();
        let bar = lemma13_convert(&leq).unwrap();
        for p in [&leq, &expanded, &bar] {
            for n in norm_trace(p, &w).unwrap() {
                prop_assert!((n - 1.0).abs() < 1e-12);
            }
        }
        let f = qpda_accept_probability(&leq, &w).unwrap();
        prop_assert!(close(qpda_accept_probability(&bar, &w).unwrap(), f));
        let expected = if w.count("a") == w.count("b") { 1.0 } else { 0.0 };
        prop_assert!(close(f, expected));
    }

    #[test]
    fn steps_are_linear(seed in any::<u64>(), words in any::<bool>(), len in 1usize..5) {
        let p = random_qpda(seed, words, AcceptanceMode::EmptyStackAndControl);
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let (alpha, beta) = (amp(&mut r), amp(&mut r));
        let s1 = SparseState::basis("p", vec![sym("x"), sym("y")]);
        let s2 = SparseState::basis("q", vec![]);
        let mut mixed = s1.scale(alpha).plus(&s2.scale(beta));
        let (mut a1, mut a2) = (s1, s2);
        for a in random_word(&mut r, &ab(), len).iter() {
            mixed = qpda_step(&p, &mixed, a).unwrap();
            a1 = qpda_step(&p, &a1, a).unwrap();
            a2 = qpda_step(&p, &a2, a).unwrap();
        }
        let combined = a1.scale(alpha).plus(&a2.scale(beta));
        prop_assert!(mixed.max_abs_diff(&combined) < 1e-12);
    }

    #[test]
    fn stack_height_is_bounded(seed in any::<u64>(), words in any::<bool>(), len in 0usize..7) {
        let p = random_qpda(seed, words, AcceptanceMode::EmptyStackAndControl);
        let w = random_word(&mut ChaCha8Rng::seed_from_u64(seed ^ 3), &ab(), len);
        let start = p.s_init().iter().map(|e| e.stack.len()).max().unwrap_or(0);
        let bound = start + len * p.max_push_len().max(1);
        prop_assert!(qpda_run(&p, &w).unwrap().max_stack_len() <= bound);
    }

    #[test]
    fn word_push_elimination_preserves_acceptance(seed in any::<u64>()) {
        let p = random_qpda(seed, true, AcceptanceMode::EmptyStackAndControl);
        let single = lemma12_convert(&p).unwrap();
        prop_assert!(!single.pushes_words());
        for w in words_up_to(&ab(), 4) {
            prop_assert!(close(qpda_accept_probability(&single, &w).unwrap(), qpda_accept_probability(&p, &w).unwrap()), "{}", w);
        }
    }

    #[test]
    fn empty_stack_flag_preserves_acceptance(seed in any::<u64>(), words in any::<bool>()) {
        let p = random_qpda(seed, words, AcceptanceMode::EmptyStackAndControl);
        let flagged = lemma13_convert(&p).unwrap();
        prop_assert_eq!(flagged.acceptance(), AcceptanceMode::ControlOnly);
        for w in words_up_to(&ab(), 4) {
            prop_assert!(close(qpda_accept_probability(&flagged, &w).unwrap(), qpda_accept_probability(&p, &w).unwrap()), "{}", w);
        }
    }

    #[test]
    fn machines_compile_to_grammars(seed in any::<u64>(), words in any::<bool>()) {
        let p = random_qpda(seed, words, AcceptanceMode::EmptyStackAndControl);
        let g = qpda_to_grammar(&p).unwrap();
        for w in words_up_to(&ab(), 4) {
            prop_assert!(close(f_of_word(&g, &w).unwrap(), qpda_accept_probability(&p, &w).unwrap()), "{}", w);
        }
    }

    #[test]
    fn grammars_compile_to_machines(seed in any::<u64>()) {
        let g = to_greibach(&scaled_grammar(seed)).unwrap();
        let p = grammar_to_qpda(&g).unwrap();
        for w in words_up_to(&ab(), 5) {
            prop_assert!(close(qpda_accept_probability(&p, &w).unwrap(), f_of_word(&g, &w).unwrap()), "{}", w);
        }
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), words in any::<bool>(), control_only in any::<bool>()) {
        let m = Machine::Qpda(random_qpda(seed, words, mode(control_only)));
        prop_assert_eq!(machine_from_json(&machine_to_json(&m)).unwrap(), m);
        let g = Machine::Grammar(scaled_grammar(seed));
        prop_assert_eq!(machine_from_json(&machine_to_json(&g)).unwrap(), g);
    }
}

#[test]
fn word_push_elimination_rejects_control_acceptance() {
    // `x y` packs both as one block and as two, so the images would not interfere
    let p = random_qpda(1, true, AcceptanceMode::ControlOnly);
    assert!(matches!(lemma12_convert(&p), Err(qlang::Error::Mode(_))));
}

#[test]
fn word_lookup_rejects_foreign_symbols() {
    let p = build_leq_qpda();
    assert!(qpda_accept_probability(&p, &Word::from_chars("ac")).is_err());
}

//! Amplitude-preserving normal forms: unit-production resummation, Chomsky
//! form, left-recursion removal and Greibach form.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::word::Symbol;

use super::{accumulate, fresh_name, taken_names, GSymbol, ProductionMap, QuantumGrammar};

/// Largest acceptable condition number of `1 − M` in unit resummation.
const MAX_CONDITION: f64 = 1e12;

/// Checks that the only ε-production comes from an initial variable that
/// never occurs on a right-hand side.
pub fn check_epsilon_restriction(g: &QuantumGrammar) -> Result<()> {
    for p in g.active_productions() {
        if p.is_epsilon() && (p.lhs != g.initial() || g.initial_on_rhs()) {
            return Err(Error::Precondition(format!(
                "ε-production {p} is only allowed from an initial variable that occurs on no right-hand side"
            )));
        }
    }
    Ok(())
}

fn infinity_norm(m: &ComplexMatrix) -> f64 {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Resums chains of unit productions `v_i ⇒ v_j` as `(1 − M)⁻¹` per
/// amplitude coordinate and removes every unit production.
pub fn eliminate_unit_productions(g: &QuantumGrammar) -> Result<QuantumGrammar> {
    let vars = g.variables();
    let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let m = vars.len();
    let units: Vec<_> = g.active_productions().filter(|p| p.is_unit()).collect();
    if units.is_empty() {
        return Ok(g.clone());
    }
    let mut resolvents = Vec::with_capacity(g.dimensionality());
    for k in 0..g.dimensionality() {
        let mut a = ComplexMatrix::identity(m);
        for p in &units {
            let i = index[p.lhs.as_str()];
            let j = index[p.rhs[0].name()];
            a[(i, j)] -= p.amplitudes[k];
        }
        let inv = a
            .inverse(1e-12)
            .map_err(|_| Error::Singular(format!("1 - M is singular in coordinate {k}")))?;
        let cond = infinity_norm(&a) * infinity_norm(&inv);
        if !cond.is_finite() || cond > MAX_CONDITION {
            return Err(Error::Singular(format!(
                "1 - M is ill-conditioned in coordinate {k} (condition {cond:e})"
            )));
        }
        resolvents.push(inv);
    }
    let mut map = ProductionMap::new();
    for p in g.active_productions().filter(|p| !p.is_unit()) {
        let j = index[p.lhs.as_str()];
        for (i, v) in vars.iter().enumerate() {
            let amps = ComplexVector::new(
                (0..g.dimensionality())
                    .map(|k| resolvents[k][(i, j)] * p.amplitudes[k])
                    .collect(),
            );
            if !amps.is_zero() {
                accumulate(&mut map, v, p.rhs.clone(), amps);
            }
        }
    }
    QuantumGrammar::from_map(
        vars.to_vec(),
        g.terminals().to_vec(),
        g.initial().to_string(),
        g.dimensionality(),
        map,
    )
}

/// Chomsky form: terminals inside longer right-hand sides are wrapped in
/// fresh variables, and long right-hand sides are split into chains. The
/// original amplitude sits on the first production of each chain and every
/// auxiliary production has amplitude 1.
pub fn to_chomsky(g: &QuantumGrammar) -> Result<QuantumGrammar> {
    check_epsilon_restriction(g)?;
    if let Some(p) = g.active_productions().find(|p| p.is_unit()) {
        return Err(Error::Precondition(format!(
            "unit production {p} must be eliminated first"
        )));
    }
    let dim = g.dimensionality();
    let ones = ComplexVector::ones(dim);
    let mut taken = taken_names(g);
    let mut variables = g.variables().to_vec();
    let mut wrappers: BTreeMap<Symbol, String> = BTreeMap::new();
    let mut map = ProductionMap::new();
    for p in g.active_productions() {
        if p.rhs.len() <= 1 {
            accumulate(&mut map, &p.lhs, p.rhs.clone(), p.amplitudes.clone());
            continue;
        }
        let symbols: Vec<GSymbol> = p
            .rhs
            .iter()
            .map(|s| match s {
                GSymbol::Var(_) => s.clone(),
                GSymbol::Term(t) => {
                    let name = wrappers.entry(t.clone()).or_insert_with(|| {
                        let name = fresh_name(&format!("T_{t}"), &mut taken);
                        variables.push(name.clone());
                        accumulate(&mut map, &name, vec![s.clone()], ones.clone());
                        name
                    });
                    GSymbol::var(name.clone())
                }
            })
            .collect();
        let mut lhs = p.lhs.clone();
        let mut amps = p.amplitudes.clone();
        let mut rest = &symbols[..];
        while rest.len() > 2 {
            let tail = fresh_name(&format!("{}_{}", p.lhs, rest.len() - 1), &mut taken);
            variables.push(tail.clone());
            accumulate(&mut map, &lhs, vec![rest[0].clone(), GSymbol::var(tail.clone())], amps);
            lhs = tail;
            amps = ones.clone();
            rest = &rest[1..];
        }
        accumulate(&mut map, &lhs, rest.to_vec(), amps);
    }
    QuantumGrammar::from_map(variables, g.terminals().to_vec(), g.initial().to_string(), dim, map)
}

/// Working form used by the Greibach loop: right-hand sides per variable.
type Rules = BTreeMap<String, BTreeMap<Vec<GSymbol>, ComplexVector>>;

fn rules_of(map: ProductionMap) -> Rules {
    let mut rules = Rules::new();
    for ((lhs, rhs), amps) in map {
        rules.entry(lhs).or_default().insert(rhs, amps);
    }
    rules
}

fn add_rule(rules: &mut Rules, lhs: &str, rhs: Vec<GSymbol>, amps: ComplexVector) {
    let slot = rules.entry(lhs.to_string()).or_default();
    match slot.get_mut(&rhs) {
        Some(existing) => *existing = existing.add(&amps).expect("same dimensionality"),
        None => {
            slot.insert(rhs, amps);
        }
    }
}

/// Replaces `v → v α` (amplitude `q`) and `v → β` (amplitude `p`) by
/// `v → β | β B` (both `p`) and `B → α | α B` (both `q`) with `B` fresh.
fn remove_immediate(
    rules: &mut Rules,
    v: &str,
    taken: &mut BTreeSet<String>,
    variables: &mut Vec<String>,
) -> Result<Option<String>> {
    let own = rules.remove(v).unwrap_or_default();
    let (recursive, others): (Vec<_>, Vec<_>) = own
        .into_iter()
        .partition(|(rhs, _)| rhs.first().and_then(GSymbol::as_var) == Some(v));
    if recursive.is_empty() {
        rules.insert(v.to_string(), others.into_iter().collect());
        return Ok(None);
    }
    if recursive.iter().any(|(rhs, _)| rhs.len() == 1) {
        return Err(Error::Precondition(format!("unit self-loop on `{v}`")));
    }
    let b = fresh_name(&format!("{v}_r"), taken);
    variables.push(b.clone());
    for (beta, p) in others {
        let mut with_b = beta.clone();
        with_b.push(GSymbol::var(b.clone()));
        add_rule(rules, v, beta, p.clone());
        add_rule(rules, v, with_b, p);
    }
    for (rhs, q) in recursive {
        let alpha = rhs[1..].to_vec();
        let mut with_b = alpha.clone();
        with_b.push(GSymbol::var(b.clone()));
        add_rule(rules, &b, alpha, q.clone());
        add_rule(rules, &b, with_b, q);
    }
    Ok(Some(b))
}

fn finish(
    rules: Rules,
    variables: Vec<String>,
    g: &QuantumGrammar,
) -> Result<QuantumGrammar> {
    let mut map = ProductionMap::new();
    for (lhs, rhss) in rules {
        for (rhs, amps) in rhss {
            accumulate(&mut map, &lhs, rhs, amps);
        }
    }
    QuantumGrammar::from_map(
        variables,
        g.terminals().to_vec(),
        g.initial().to_string(),
        g.dimensionality(),
        map,
    )
}

/// Removes immediate left recursion `v → v α` from every variable.
pub fn eliminate_left_recursion(g: &QuantumGrammar) -> Result<QuantumGrammar> {
    if !g
        .active_productions()
        .any(|p| p.rhs.first().and_then(GSymbol::as_var) == Some(p.lhs.as_str()))
    {
        return Ok(g.clone());
    }
    let mut rules = rules_of(g.to_map());
    let mut taken = taken_names(g);
    let mut variables = g.variables().to_vec();
    for v in g.variables() {
        remove_immediate(&mut rules, v, &mut taken, &mut variables)?;
    }
    finish(rules, variables, g)
}

fn substitute_leading(rules: &mut Rules, lhs: &str, target: &str) {
    let Some(own) = rules.get(lhs).cloned() else {
        return;
    };
    let (leading, keep): (Vec<_>, Vec<_>) = own
        .into_iter()
        .partition(|(rhs, _)| rhs.first().and_then(GSymbol::as_var) == Some(target));
    if leading.is_empty() {
        return;
    }
    rules.insert(lhs.to_string(), keep.into_iter().collect());
    let expansions: Vec<_> = rules
        .get(target)
        .map(|m| m.iter().map(|(r, a)| (r.clone(), a.clone())).collect())
        .unwrap_or_default();
    for (rhs, c) in leading {
        for (delta, d) in &expansions {
            let mut new_rhs = delta.clone();
            new_rhs.extend_from_slice(&rhs[1..]);
            add_rule(rules, lhs, new_rhs, c.hadamard(d));
        }
    }
}

/// Greibach form through unit elimination, Chomsky form and the ordered
/// substitution loop with immediate left-recursion removal.
pub fn to_greibach(g: &QuantumGrammar) -> Result<QuantumGrammar> {
    check_epsilon_restriction(g)?;
    if g.is_greibach() {
        return Ok(g.clone());
    }
    let cnf = to_chomsky(&eliminate_unit_productions(g)?)?.trim()?;
    let order: Vec<String> = cnf.variables().to_vec();
    let mut rules = rules_of(cnf.to_map());
    let mut taken = taken_names(&cnf);
    let mut variables = cnf.variables().to_vec();
    let mut introduced = Vec::new();

    for i in 0..order.len() {
        for j in 0..i {
            substitute_leading(&mut rules, &order[i], &order[j]);
        }
        if let Some(b) = remove_immediate(&mut rules, &order[i], &mut taken, &mut variables)? {
            introduced.push(b);
        }
    }
    // Now every A_i rule starts with a terminal or some A_j with j > i.
    for i in (0..order.len()).rev() {
        for j in i + 1..order.len() {
            substitute_leading(&mut rules, &order[i], &order[j]);
        }
    }
    for b in &introduced {
        for a in &order {
            substitute_leading(&mut rules, b, a);
        }
    }

    let mut map = ProductionMap::new();
    let ones = ComplexVector::ones(g.dimensionality());
    let mut wrappers: BTreeMap<Symbol, String> = BTreeMap::new();
    for (lhs, rhss) in rules {
        for (rhs, amps) in rhss {
            let mut out = Vec::with_capacity(rhs.len());
            for (pos, s) in rhs.into_iter().enumerate() {
                match s {
                    GSymbol::Term(t) if pos > 0 => {
                        let name = wrappers.entry(t.clone()).or_insert_with(|| {
                            let name = fresh_name(&format!("T_{t}"), &mut taken);
                            variables.push(name.clone());
                            name
                        });
                        out.push(GSymbol::var(name.clone()));
                    }
                    other => out.push(other),
                }
            }
            accumulate(&mut map, &lhs, out, amps);
        }
    }
    for (t, name) in &wrappers {
        accumulate(&mut map, name, vec![GSymbol::Term(t.clone())], ones.clone());
    }
    let out = QuantumGrammar::from_map(
        variables,
        g.terminals().to_vec(),
        g.initial().to_string(),
        g.dimensionality(),
        map,
    )?
    .trim()?;
    if !out.is_greibach() {
        return Err(Error::Invariant("Greibach conversion left a non-Greibach production".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{c, real, Complex, ONE};
    use crate::catalog;
    use crate::grammar::{derive_amplitudes, span_amplitudes};
    use crate::word::{alphabet, words_up_to, Word};

    fn agree(a: &QuantumGrammar, b: &QuantumGrammar, letters: &[&str], max_len: usize) {
        for w in words_up_to(&alphabet(letters), max_len) {
            let x = derive_amplitudes(a, &w).unwrap();
            let y = derive_amplitudes(b, &w).unwrap();
            assert!(x.max_abs_diff(&y) < 1e-9, "{w}: {x:?} vs {y:?}");
        }
    }

    #[test]
    fn unit_chain_resummation() {
        let g = QuantumGrammar::from_rules(
            &["I", "X"],
            &["a"],
            "I",
            1,
            &[
                ("I", &["X"], vec![real(0.5)]),
                ("I", &["a"], vec![ONE]),
                ("X", &["a"], vec![ONE]),
            ],
        )
        .unwrap();
        let h = eliminate_unit_productions(&g).unwrap();
        let amp = h.amplitude("I", &[GSymbol::term("a")]);
        assert!((amp[0] - real(1.5)).norm() < 1e-12);
        assert!(h.active_productions().all(|p| !p.is_unit()));
    }

    #[test]
    fn unit_cycle_resums_geometrically() {
        // I -> X (1/2), X -> I (1/2), I -> a: c(a) = 1/(1 - 1/4)
        let g = QuantumGrammar::from_rules(
            &["I", "X"],
            &["a"],
            "I",
            1,
            &[
                ("I", &["X"], vec![real(0.5)]),
                ("X", &["I"], vec![real(0.5)]),
                ("I", &["a"], vec![ONE]),
            ],
        )
        .unwrap();
        let h = eliminate_unit_productions(&g).unwrap();
        let amp = derive_amplitudes(&h, &Word::from_chars("a")).unwrap()[0];
        assert!((amp - real(4.0 / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn divergent_unit_loop() {
        let g = QuantumGrammar::from_rules(
            &["I"],
            &["a"],
            "I",
            1,
            &[("I", &["I"], vec![ONE]), ("I", &["a"], vec![ONE])],
        )
        .unwrap();
        assert!(matches!(eliminate_unit_productions(&g), Err(Error::Singular(_))));
    }

    #[test]
    fn no_units_is_identity() {
        let g = catalog::dyck_grammar();
        assert_eq!(eliminate_unit_productions(&g).unwrap(), g);
    }

    #[test]
    fn chomsky_of_ab() {
        let q = c(0.6, 0.8);
        let g = QuantumGrammar::from_rules(&["I"], &["a", "b"], "I", 1, &[("I", &["a", "b"], vec![q])])
            .unwrap();
        let h = to_chomsky(&g).unwrap();
        assert!(h.is_chomsky());
        assert_eq!(h.productions().len(), 3);
        assert_eq!(h.amplitude("I", &[GSymbol::var("T_a"), GSymbol::var("T_b")])[0], q);
        assert_eq!(h.amplitude("T_a", &[GSymbol::term("a")])[0], ONE);
        agree(&g, &h, &["a", "b"], 4);
    }

    #[test]
    fn chomsky_of_dyck() {
        let g = catalog::dyck_grammar_separated();
        let h = to_chomsky(&eliminate_unit_productions(&g).unwrap()).unwrap();
        assert!(h.is_chomsky());
        agree(&g, &h, &["a", "b"], 8);
    }

    #[test]
    fn chomsky_rejects_units_and_inner_epsilon() {
        assert!(matches!(to_chomsky(&catalog::dyck_grammar()), Err(Error::Precondition(_))));
        let g = QuantumGrammar::from_rules(
            &["I", "X"],
            &["a"],
            "I",
            1,
            &[("I", &["X"], vec![ONE]), ("X", &["a"], vec![ONE])],
        )
        .unwrap();
        assert!(matches!(to_chomsky(&g), Err(Error::Precondition(_))));
    }

    #[test]
    fn left_recursion_geometric_chain() {
        let q = c(0.3, 0.4);
        let p = c(-0.5, 0.2);
        let g = QuantumGrammar::from_rules(
            &["V"],
            &["a", "b"],
            "V",
            1,
            &[("V", &["V", "a"], vec![q]), ("V", &["b"], vec![p])],
        )
        .unwrap();
        let h = eliminate_left_recursion(&g).unwrap();
        for p_ in h.active_productions() {
            assert_ne!(p_.rhs.first().and_then(GSymbol::as_var), Some(p_.lhs.as_str()));
        }
        for n in 0..6 {
            let w = Word::from_chars(&format!("b{}", "a".repeat(n)));
            let amp = span_amplitudes(&h, &w).unwrap()[0];
            let expected: Complex = p * q.powu(n as u32);
            assert!((amp - expected).norm() < 1e-12);
        }
        let unchanged = eliminate_left_recursion(&catalog::dyck_grammar_separated()).unwrap();
        assert_eq!(unchanged, catalog::dyck_grammar_separated());
    }

    #[test]
    fn greibach_of_dyck() {
        let g = catalog::dyck_grammar_separated();
        let h = to_greibach(&g).unwrap();
        assert!(h.is_greibach());
        agree(&g, &h, &["a", "b"], 8);
    }

    #[test]
    fn greibach_of_left_recursive_complex_grammar() {
        let g = QuantumGrammar::from_rules(
            &["S", "A", "B"],
            &["a", "b"],
            "S",
            2,
            &[
                ("S", &["A", "B"], vec![ONE, c(0.0, 1.0)]),
                ("A", &["A", "a"], vec![real(0.5), c(0.2, 0.1)]),
                ("A", &["b"], vec![ONE, real(-1.0)]),
                ("A", &["B"], vec![real(0.25), real(0.5)]),
                ("B", &["B", "A"], vec![c(0.1, -0.3), real(0.4)]),
                ("B", &["a"], vec![real(2.0), ONE]),
            ],
        )
        .unwrap();
        let h = to_greibach(&g).unwrap();
        assert!(h.is_greibach());
        agree(&g, &h, &["a", "b"], 7);
    }

    #[test]
    fn greibach_is_identity_on_greibach_input() {
        let g = QuantumGrammar::from_rules(
            &["I"],
            &["a", "b"],
            "I",
            1,
            &[("I", &["a", "I"], vec![ONE]), ("I", &["b"], vec![ONE])],
        )
        .unwrap();
        assert_eq!(to_greibach(&g).unwrap(), g);
    }

    #[test]
    fn greibach_rejects_inner_epsilon() {
        assert!(matches!(to_greibach(&catalog::dyck_grammar()), Err(Error::Precondition(_))));
    }
}

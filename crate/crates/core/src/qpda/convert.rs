//! Conversions between push-down machines, grammars and finite automata.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::algebra::{Complex, ComplexVector, ZERO};
use crate::error::{Error, Result};
use crate::grammar::{fresh_name, GSymbol, Production, QuantumGrammar};
use crate::qfa::Qfa;
use crate::word::Symbol;

use super::{AcceptanceMode, Action, Below, InitEntry, Qpda, Rule, DUMMY, PRUNE_TOL};

type RuleKey = (Symbol, String, Option<Symbol>, Action, Below, String);

/// Collects rules, summing the amplitudes of identical ones.
#[derive(Default)]
struct RuleSet(BTreeMap<RuleKey, Complex>);

impl RuleSet {
    fn add(&mut self, r: Rule) {
        *self.0.entry(r.key()).or_insert(ZERO) += r.amplitude;
    }

    fn into_rules(self) -> Vec<Rule> {
        self.0
            .into_iter()
            .filter(|(_, z)| z.norm() >= PRUNE_TOL)
            .map(|((input, from, top, action, below, to), amplitude)| Rule {
                input,
                from,
                top,
                action,
                below,
                to,
                amplitude,
            })
            .collect()
    }
}

/// One control per amplitude coordinate; the stack holds the variables still
/// to be expanded, and a production `v → a γ` replaces `v` by `γ` on input
/// `a`. The initial state puts `I` on the stack in every control with
/// amplitude 1, so the machine is generalized.
pub fn grammar_to_qpda(g: &QuantumGrammar) -> Result<Qpda> {
    if !g.is_greibach() {
        return Err(Error::Precondition("grammar is not in Greibach form".into()));
    }
    let dim = g.dimensionality();
    let controls: Vec<String> = (0..dim).map(|k| format!("q{k}")).collect();
    let mut rules = Vec::new();
    let mut s_init: Vec<InitEntry> = controls
        .iter()
        .map(|q| InitEntry {
            control: q.clone(),
            stack: vec![Symbol::from(g.initial())],
            amplitude: crate::algebra::ONE,
        })
        .collect();
    for p in g.active_productions() {
        let Some((GSymbol::Term(a), rest)) = p.rhs.split_first() else {
            // only the start variable may produce ε in Greibach form
            for (k, z) in p.amplitudes.iter().enumerate() {
                if *z != ZERO {
                    s_init.push(InitEntry {
                        control: controls[k].clone(),
                        stack: vec![],
                        amplitude: *z,
                    });
                }
            }
            continue;
        };
        let gamma: Vec<Symbol> = rest.iter().map(|s| Symbol::from(s.name())).collect();
        let action = if gamma.is_empty() { Action::Pop } else { Action::PushWord(gamma) };
        for (k, z) in p.amplitudes.iter().enumerate() {
            if *z != ZERO {
                rules.push(Rule::new(a.clone(), &controls[k], Some(&p.lhs), action.clone(), &controls[k], *z));
            }
        }
    }
    Qpda::new(
        controls.clone(),
        g.terminals().to_vec(),
        g.variables().iter().map(|v| Symbol::from(v.as_str())).collect(),
        rules,
        s_init,
        controls.into_iter().collect(),
        AcceptanceMode::EmptyStackAndControl,
        false,
        true,
    )
}

fn pair_symbol(s: &Symbol, t: &Symbol) -> Symbol {
    Symbol::from(format!("({s},{t})"))
}

/// `s₁ s₂ … sₙ ↦ (s₁,s₂)(s₂,s₃)…(sₙ₋₁,sₙ) sₙ`.
fn encode_stack(stack: &[Symbol]) -> Vec<Symbol> {
    let mut out: Vec<Symbol> = stack.windows(2).map(|w| pair_symbol(&w[0], &w[1])).collect();
    out.extend(stack.last().cloned());
    out
}

/// Pairs for a word `γ` sitting on top of a symbol `u`.
fn encode_over(gamma: &[Symbol], u: &Symbol) -> Vec<Symbol> {
    gamma
        .iter()
        .enumerate()
        .map(|(i, s)| pair_symbol(s, gamma.get(i + 1).unwrap_or(u)))
        .collect()
}

/// Removes every dependence on the symbol below the top by storing adjacent
/// stack symbols in pairs: the stack `s t u` becomes `(s,t) (t,u) u`.
pub fn lemma11_expand(p: &Qpda) -> Result<Qpda> {
    if p.unitary_claimed() {
        return Err(Error::Mode("stack-pair expansion needs a generalized machine".into()));
    }
    let alphabet = p.stack_alphabet();
    let mut new_alphabet: Vec<Symbol> = alphabet.to_vec();
    for s in alphabet {
        for t in alphabet {
            let pair = pair_symbol(s, t);
            if alphabet.contains(&pair) {
                return Err(Error::Precondition(format!("stack symbol `{pair}` is reserved")));
            }
            new_alphabet.push(pair);
        }
    }
    let mut rules = RuleSet::default();
    let mut pushes_words = p.pushes_words();
    for r in p.rules() {
        let base = |top: Option<Symbol>, action: Action| Rule {
            input: r.input.clone(),
            from: r.from.clone(),
            top,
            action,
            below: Below::Any,
            to: r.to.clone(),
            amplitude: r.amplitude,
        };
        let Some(t) = &r.top else {
            let action = match &r.action {
                Action::PushWord(g) => Action::PushWord(encode_stack(g)),
                other => other.clone(),
            };
            rules.add(base(None, action));
            continue;
        };
        if r.below.matches(None) {
            let action = match &r.action {
                Action::Push(s) => Action::Push(pair_symbol(s, t)),
                Action::PushWord(g) => Action::PushWord(encode_stack(g)),
                other => other.clone(),
            };
            rules.add(base(Some(t.clone()), action));
        }
        for u in alphabet {
            if !r.below.matches(Some(u)) {
                continue;
            }
            let action = match &r.action {
                Action::Push(s) => Action::Push(pair_symbol(s, t)),
                Action::PushWord(g) => {
                    pushes_words = true;
                    Action::PushWord(encode_over(g, u))
                }
                other => other.clone(),
            };
            rules.add(base(Some(pair_symbol(t, u)), action));
        }
    }
    let s_init = p
        .s_init()
        .iter()
        .map(|e| InitEntry {
            stack: encode_stack(&e.stack),
            ..e.clone()
        })
        .collect();
    Qpda::new(
        p.controls().to_vec(),
        p.input_alphabet().to_vec(),
        new_alphabet,
        rules.into_rules(),
        s_init,
        p.accept_controls().clone(),
        p.acceptance(),
        false,
        pushes_words,
    )
}

/// A block of up to `k` stack symbols: `slots` is left-padded with the dummy
/// symbol and the live part is `slots[m..]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Block {
    slots: Vec<Symbol>,
    m: usize,
}

impl Block {
    fn padded(word: &[Symbol], k: usize) -> Self {
        let mut slots = vec![Symbol::from(DUMMY); k - word.len()];
        slots.extend_from_slice(word);
        Self { slots, m: k - word.len() }
    }

    fn top(&self) -> &Symbol {
        &self.slots[self.m]
    }

    fn advanced(&self) -> Option<Self> {
        (self.m + 1 < self.slots.len()).then(|| Self {
            slots: self.slots.clone(),
            m: self.m + 1,
        })
    }

    fn symbol(&self) -> Symbol {
        let names: Vec<&str> = self.slots.iter().map(Symbol::as_str).collect();
        Symbol::from(format!("[{}|{}]", names.join(","), self.m))
    }
}

fn block_control(q: &str, b: Option<&Block>) -> String {
    match b {
        Some(b) => format!("{q}/{}", b.symbol()),
        None => format!("{q}/-"),
    }
}

/// Rewrites a word-pushing machine into one that pushes single symbols. Up
/// to `k` stack symbols are packed into one block symbol together with a
/// pointer to the live top, and the topmost block is held in the control.
/// A stack can be packed in several ways, so only the empty stack has a
/// unique image and the machine must accept on empty stacks.
pub fn lemma12_convert(p: &Qpda) -> Result<Qpda> {
    if p.unitary_claimed() {
        return Err(Error::Mode("word-push elimination needs a generalized machine".into()));
    }
    if p.acceptance() != AcceptanceMode::EmptyStackAndControl {
        return Err(Error::Mode("word-push elimination needs empty-stack acceptance".into()));
    }
    if p.depends_on_below() {
        return Err(Error::Precondition(
            "rules depend on the symbol below the top; expand the stack alphabet first".into(),
        ));
    }
    if p.stack_alphabet().iter().any(|s| s.as_str() == DUMMY) {
        return Err(Error::Precondition(format!("stack symbol `{DUMMY}` is reserved")));
    }
    let k = p.max_push_len().max(1);

    // every block that can ever occur
    let mut blocks: BTreeSet<Block> = BTreeSet::new();
    let mut init: Vec<(String, Option<Block>, Vec<Block>, Complex)> = Vec::new();
    for e in p.s_init() {
        let chunks: Vec<Block> = e.stack.chunks(k).map(|c| Block::padded(c, k)).collect();
        blocks.extend(chunks.iter().cloned());
        let mut iter = chunks.into_iter();
        let head = iter.next();
        init.push((e.control.clone(), head, iter.collect(), e.amplitude));
    }
    for r in p.rules() {
        match &r.action {
            Action::Push(s) => {
                blocks.insert(Block::padded(std::slice::from_ref(s), k));
            }
            Action::PushWord(g) if !g.is_empty() => {
                blocks.insert(Block::padded(g, k));
            }
            _ => {}
        }
    }
    let mut queue: VecDeque<Block> = blocks.iter().cloned().collect();
    while let Some(b) = queue.pop_front() {
        if let Some(next) = b.advanced() {
            if blocks.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    let real_tops: Vec<Option<&Block>> = std::iter::once(None).chain(blocks.iter().map(Some)).collect();

    let mut rules = RuleSet::default();
    let rule = |a: &Symbol, from: String, top: Option<&Block>, action: Action, to: String, z: Complex| Rule {
        input: a.clone(),
        from,
        top: top.map(Block::symbol),
        action,
        below: Below::Any,
        to,
        amplitude: z,
    };
    for q in p.controls() {
        // empty represented stack
        for r in p.rules().iter().filter(|r| &r.from == q && r.top.is_none()) {
            let (action, next) = match &r.action {
                Action::Stay => (Action::Stay, None),
                Action::PushWord(g) if g.is_empty() => (Action::Stay, None),
                Action::Push(s) => (Action::Stay, Some(Block::padded(std::slice::from_ref(s), k))),
                Action::PushWord(g) => (Action::Stay, Some(Block::padded(g, k))),
                Action::Pop => unreachable!("pop from an empty stack is rejected at construction"),
            };
            rules.add(rule(&r.input, block_control(q, None), None, action, block_control(&r.to, next.as_ref()), r.amplitude));
        }
        for b in &blocks {
            let from = block_control(q, Some(b));
            for r in p.rules().iter().filter(|r| &r.from == q && r.top.as_ref() == Some(b.top())) {
                let to = &r.to;
                let gamma: Option<&[Symbol]> = match &r.action {
                    Action::Pop => Some(&[]),
                    Action::PushWord(g) => Some(g),
                    _ => None,
                };
                for real in &real_tops {
                    let (action, next) = match (&r.action, gamma) {
                        (Action::Stay, _) => (Action::Stay, Some(b.clone())),
                        (Action::Push(s), _) => (
                            Action::Push(b.symbol()),
                            Some(Block::padded(std::slice::from_ref(s), k)),
                        ),
                        (_, Some([])) => match (b.advanced(), real) {
                            (Some(rest), _) => (Action::Stay, Some(rest)),
                            (None, Some(below)) => (Action::Pop, Some((*below).clone())),
                            (None, None) => (Action::Stay, None),
                        },
                        (_, Some(g)) => match b.advanced() {
                            Some(rest) => (Action::Push(rest.symbol()), Some(Block::padded(g, k))),
                            None => (Action::Stay, Some(Block::padded(g, k))),
                        },
                        _ => unreachable!(),
                    };
                    rules.add(rule(&r.input, from.clone(), *real, action, block_control(to, next.as_ref()), r.amplitude));
                }
            }
        }
    }
    let rules = rules.into_rules();

    // keep the controls reachable from the initial ones
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for r in &rules {
        succ.entry(r.from.as_str()).or_default().push(r.to.as_str());
    }
    let init_controls: Vec<String> = init.iter().map(|(q, b, _, _)| block_control(q, b.as_ref())).collect();
    let mut reach: BTreeSet<&str> = init_controls.iter().map(String::as_str).collect();
    let mut queue: VecDeque<&str> = reach.iter().copied().collect();
    while let Some(c) = queue.pop_front() {
        for &n in succ.get(c).into_iter().flatten() {
            if reach.insert(n) {
                queue.push_back(n);
            }
        }
    }
    let reach: BTreeSet<String> = reach.into_iter().map(str::to_string).collect();
    drop(succ);
    let mut controls: BTreeSet<String> = reach.clone();
    let accept: BTreeSet<String> = p.accept_controls().iter().map(|q| block_control(q, None)).collect();
    controls.extend(accept.iter().cloned());
    let rules: Vec<Rule> = rules.into_iter().filter(|r| reach.contains(r.from.as_str())).collect();
    let s_init = init
        .into_iter()
        .map(|(q, head, rest, z)| InitEntry {
            control: block_control(&q, head.as_ref()),
            stack: rest.iter().map(Block::symbol).collect(),
            amplitude: z,
        })
        .collect();
    Qpda::new(
        controls.into_iter().collect(),
        p.input_alphabet().to_vec(),
        blocks.iter().map(Block::symbol).collect(),
        rules,
        s_init,
        accept,
        AcceptanceMode::EmptyStackAndControl,
        false,
        false,
    )
}

/// Doubles the controls so that emptiness of the stack is recorded in the
/// control: a configuration `(q, ε)` becomes `(q̄, ε)` and nonempty stacks
/// keep their plain control. The unused configurations `(q, ε)` and `(q̄, σ)`
/// are fixed by every input, so unitarity carries over.
pub fn lemma13_convert(p: &Qpda) -> Result<Qpda> {
    if p.acceptance() != AcceptanceMode::EmptyStackAndControl {
        return Err(Error::Mode("machine already accepts on controls alone".into()));
    }
    let mut taken: BTreeSet<String> = p.controls().iter().cloned().collect();
    let bar: BTreeMap<&str, String> = p
        .controls()
        .iter()
        .map(|q| (q.as_str(), fresh_name(&format!("{q}~"), &mut taken)))
        .collect();
    let mut rules = RuleSet::default();
    for r in p.rules() {
        let with = |from: &str, action: Action, below: Below, to: &str| Rule {
            input: r.input.clone(),
            from: from.to_string(),
            top: r.top.clone(),
            action,
            below,
            to: to.to_string(),
            amplitude: r.amplitude,
        };
        let empties = matches!(&r.action, Action::Pop) || r.action == Action::PushWord(vec![]);
        match (&r.top, empties) {
            (Some(_), true) => {
                if r.below.matches(None) {
                    rules.add(with(&r.from, Action::Pop, Below::Empty, &bar[r.to.as_str()]));
                }
                for b in p.stack_alphabet() {
                    if r.below.matches(Some(b)) {
                        rules.add(with(&r.from, Action::Pop, Below::Sym(b.clone()), &r.to));
                    }
                }
            }
            (Some(_), false) => rules.add(with(&r.from, r.action.clone(), r.below.clone(), &r.to)),
            (None, true) => rules.add(with(&bar[r.from.as_str()], Action::Stay, Below::Any, &bar[r.to.as_str()])),
            (None, false) => {
                let to = if r.action == Action::Stay { &bar[r.to.as_str()] } else { &r.to };
                rules.add(with(&bar[r.from.as_str()], r.action.clone(), Below::Any, to));
            }
        }
    }
    for a in p.input_alphabet() {
        for q in p.controls() {
            rules.add(Rule::new(a.clone(), q, None, Action::Stay, q, crate::algebra::ONE));
            for t in p.stack_alphabet() {
                let qb = &bar[q.as_str()];
                rules.add(Rule::new(a.clone(), qb, Some(t.as_str()), Action::Stay, qb, crate::algebra::ONE));
            }
        }
    }
    let s_init = p
        .s_init()
        .iter()
        .map(|e| InitEntry {
            control: if e.stack.is_empty() { bar[e.control.as_str()].clone() } else { e.control.clone() },
            ..e.clone()
        })
        .collect();
    let controls = p
        .controls()
        .iter()
        .cloned()
        .chain(p.controls().iter().map(|q| bar[q.as_str()].clone()))
        .collect();
    Qpda::new(
        controls,
        p.input_alphabet().to_vec(),
        p.stack_alphabet().to_vec(),
        rules.into_rules(),
        s_init,
        p.accept_controls().iter().map(|q| bar[q.as_str()].clone()).collect(),
        AcceptanceMode::ControlOnly,
        p.unitary_claimed(),
        p.pushes_words(),
    )
}

fn triple(q1: &str, t: Option<&Symbol>, q2: &str) -> String {
    format!("[{q1},{},{q2}]", t.map_or("ε", Symbol::as_str))
}

/// Grammar whose variable `[q₁,t,q₂]` derives the words that take control
/// `q₁` with `t` on top to control `q₂` with `t` removed; `t = ε` stands for
/// the empty stack, which must then stay empty until the end of the word
/// in an accepting control. Coordinate `k` of the amplitudes collects the
/// runs that end in the `k`-th accepting control.
pub fn qpda_to_grammar(p: &Qpda) -> Result<QuantumGrammar> {
    if p.depends_on_below() {
        return Err(Error::Precondition(
            "rules depend on the symbol below the top; expand the stack alphabet first".into(),
        ));
    }
    if p.acceptance() != AcceptanceMode::EmptyStackAndControl {
        return Err(Error::Mode("grammar compilation needs empty-stack acceptance".into()));
    }
    let finals: Vec<&String> = p.accept_controls().iter().collect();
    // triple variables are bracketed, so only the terminals can clash
    let mut taken: BTreeSet<String> = p.input_alphabet().iter().map(|s| s.to_string()).collect();
    let initial = fresh_name("I", &mut taken);
    let dim = finals.len().max(1);
    let controls = p.controls();
    let mut prods: BTreeMap<(String, Vec<GSymbol>), ComplexVector> = BTreeMap::new();
    let mut add = |lhs: String, rhs: Vec<GSymbol>, amps: ComplexVector| {
        let e = prods.entry((lhs, rhs)).or_insert_with(|| ComplexVector::zeros(dim));
        *e = e.add(&amps).expect("same dimensionality");
    };
    let uniform = |z: Complex| ComplexVector::new(vec![z; dim]);

    // all ways of threading controls through `word`, starting at `start` and
    // ending at `end` (or anywhere when `end` is None)
    fn chains(controls: &[String], start: &str, word: &[Symbol], end: Option<&str>) -> Vec<(Vec<String>, String)> {
        let mut out = vec![(Vec::new(), start.to_string())];
        for (i, t) in word.iter().enumerate() {
            let last = i + 1 == word.len();
            let mut next = Vec::new();
            for (vars, cur) in &out {
                let targets: Vec<&str> = match (last, end) {
                    (true, Some(e)) => vec![e],
                    _ => controls.iter().map(String::as_str).collect(),
                };
                for r in targets {
                    let mut v = vars.clone();
                    v.push(triple(cur, Some(t), r));
                    next.push((v, r.to_string()));
                }
            }
            out = next;
        }
        out
    }

    for r in p.rules() {
        let a = GSymbol::Term(r.input.clone());
        let amps = uniform(r.amplitude);
        // the word that replaces the top (or lands on the empty stack)
        let gamma: Vec<Symbol> = match &r.action {
            Action::Pop => vec![],
            Action::Stay => r.top.iter().cloned().collect(),
            Action::Push(s) => std::iter::once(s.clone()).chain(r.top.iter().cloned()).collect(),
            Action::PushWord(g) => g.clone(),
        };
        match &r.top {
            Some(t) => {
                for q2 in controls {
                    if gamma.is_empty() {
                        if q2 == &r.to {
                            add(triple(&r.from, Some(t), q2), vec![a.clone()], amps.clone());
                        }
                        continue;
                    }
                    for (vars, _) in chains(controls, &r.to, &gamma, Some(q2)) {
                        let rhs = std::iter::once(a.clone()).chain(vars.into_iter().map(GSymbol::Var)).collect();
                        add(triple(&r.from, Some(t), q2), rhs, amps.clone());
                    }
                }
            }
            None => {
                for q2 in &finals {
                    for (vars, last) in chains(controls, &r.to, &gamma, None) {
                        let rhs = std::iter::once(a.clone())
                            .chain(vars.into_iter().map(GSymbol::Var))
                            .chain(std::iter::once(GSymbol::var(triple(&last, None, q2))))
                            .collect();
                        add(triple(&r.from, None, q2), rhs, amps.clone());
                    }
                }
            }
        }
    }
    for q in &finals {
        add(triple(q, None, q), vec![], uniform(crate::algebra::ONE));
    }

    for e in p.s_init() {
        for (k, q2) in finals.iter().enumerate() {
            let mut amps = ComplexVector::zeros(dim).into_entries();
            amps[k] = e.amplitude;
            for (vars, last) in chains(controls, &e.control, &e.stack, None) {
                let rhs = vars
                    .into_iter()
                    .map(GSymbol::Var)
                    .chain(std::iter::once(GSymbol::var(triple(&last, None, q2))))
                    .collect();
                add(initial.clone(), rhs, ComplexVector::new(amps.clone()));
            }
        }
    }

    let mut variables: BTreeSet<String> = BTreeSet::from([initial.clone()]);
    for (lhs, rhs) in prods.keys() {
        variables.insert(lhs.clone());
        variables.extend(rhs.iter().filter_map(|s| s.as_var().map(str::to_string)));
    }
    let productions = prods
        .into_iter()
        .filter(|(_, z)| !z.is_zero())
        .map(|((lhs, rhs), amplitudes)| Production { lhs, rhs, amplitudes })
        .collect();
    QuantumGrammar::new(
        variables.into_iter().collect(),
        p.input_alphabet().to_vec(),
        initial,
        dim,
        productions,
    )?
    .trim()
}

/// Product of a push-down machine with a finite automaton over the same
/// alphabet. The automaton is first rotated so that its accepting subspace
/// is spanned by standard basis vectors; controls are then pairs
/// `(control, basis index)`.
pub fn tensor_with_qfa(p: &Qpda, q: &Qfa) -> Result<Qpda> {
    let mine: BTreeSet<&Symbol> = p.input_alphabet().iter().collect();
    let theirs: BTreeSet<&Symbol> = q.alphabet().iter().collect();
    if mine != theirs {
        return Err(Error::AlphabetMismatch("machine and automaton read different alphabets".into()));
    }
    let q = q.with_standard_accept_basis()?;
    let n = q.dim();
    let r = q.accept_basis().len();
    let name = |c: &str, i: usize| format!("({c},{i})");
    let mut rules = Vec::new();
    for rule in p.rules() {
        let u = q.transition(&rule.input)?;
        let rows = u.to_rows();
        for (i, row) in rows.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                let amp = rule.amplitude * z;
                if z.norm() < PRUNE_TOL || amp.norm() < PRUNE_TOL {
                    continue;
                }
                rules.push(Rule {
                    from: name(&rule.from, i),
                    to: name(&rule.to, j),
                    amplitude: amp,
                    ..rule.clone()
                });
            }
        }
    }
    let mut s_init = Vec::new();
    for e in p.s_init() {
        for (i, z) in q.s_init().iter().enumerate() {
            if z.norm() >= PRUNE_TOL {
                s_init.push(InitEntry {
                    control: name(&e.control, i),
                    stack: e.stack.clone(),
                    amplitude: e.amplitude * z,
                });
            }
        }
    }
    let controls = p.controls().iter().flat_map(|c| (0..n).map(move |i| name(c, i))).collect();
    let accept = p
        .accept_controls()
        .iter()
        .flat_map(|c| (0..r).map(move |i| name(c, i)))
        .collect();
    let unitary = p.unitary_claimed() && !q.is_generalized();
    let build = |unitary| {
        Qpda::new(
            controls,
            p.input_alphabet().to_vec(),
            p.stack_alphabet().to_vec(),
            rules,
            s_init,
            accept,
            p.acceptance(),
            unitary,
            p.pushes_words(),
        )
    };
    build(unitary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{c, ONE};
    use crate::catalog;
    use crate::grammar::{f_of_word, to_greibach};
    use crate::qfa::{constant, Qfa};
    use crate::qpda::{build_leq_qpda, qpda_accept_probability};
    use crate::word::{alphabet, words_up_to, Word};

    fn ab() -> Vec<Symbol> {
        alphabet(&["a", "b"])
    }

    fn is_dyck(w: &Word) -> bool {
        let mut depth = 0i32;
        for s in w {
            depth += if s.as_str() == "a" { 1 } else { -1 };
            if depth < 0 {
                return false;
            }
        }
        depth == 0
    }

    fn gnf_dyck() -> QuantumGrammar {
        to_greibach(&catalog::dyck_grammar_separated()).unwrap()
    }

    fn same_f(p: &Qpda, q: &Qpda, words: &[Word]) {
        for w in words {
            let (x, y) = (qpda_accept_probability(p, w).unwrap(), qpda_accept_probability(q, w).unwrap());
            assert!((x - y).abs() < 1e-9, "{w}: {x} vs {y}");
        }
    }

    /// One control, stack symbols `x`, `y`; the pop amplitude depends on the
    /// symbol below.
    fn below_machine() -> Qpda {
        let x = Symbol::from("x");
        let y = Symbol::from("y");
        let rules = vec![
            Rule::new("a", "q", None, Action::Push(x.clone()), "q", c(0.6, 0.0)),
            Rule::new("a", "q", Some("x"), Action::Push(y.clone()), "q", c(0.0, 0.8)),
            Rule::new("a", "q", Some("y"), Action::Push(x.clone()), "q", ONE),
            Rule::new("b", "q", Some("x"), Action::Pop, "q", c(0.5, 0.0)).with_below(Below::Empty),
            Rule::new("b", "q", Some("x"), Action::Pop, "q", c(-0.3, 0.2)).with_below(Below::Sym(y.clone())),
            Rule::new("b", "q", Some("y"), Action::Pop, "q", c(0.7, 0.0)).with_below(Below::Sym(x.clone())),
            Rule::new("b", "q", Some("y"), Action::Stay, "q", c(0.1, 0.1)),
        ];
        Qpda::new(
            vec!["q".into()],
            ab(),
            vec![x, y],
            rules,
            vec![InitEntry { control: "q".into(), stack: vec![], amplitude: ONE }],
            BTreeSet::from(["q".to_string()]),
            AcceptanceMode::EmptyStackAndControl,
            false,
            false,
        )
        .unwrap()
    }

    #[test]
    fn single_production_grammar() {
        let g = QuantumGrammar::from_rules(&["I"], &["a"], "I", 1, &[("I", &["a"], vec![ONE])]).unwrap();
        let p = grammar_to_qpda(&g).unwrap();
        for w in words_up_to(&alphabet(&["a"]), 3) {
            let expected = if w.len() == 1 { 1.0 } else { 0.0 };
            assert_eq!(qpda_accept_probability(&p, &w).unwrap(), expected);
        }
    }

    #[test]
    fn dyck_machine_matches_brackets() {
        let g = gnf_dyck();
        let p = grammar_to_qpda(&g).unwrap();
        assert!(!p.unitary_claimed());
        for w in words_up_to(&ab(), 8) {
            let f = qpda_accept_probability(&p, &w).unwrap();
            assert!((f - f64::from(u8::from(is_dyck(&w)))).abs() < 1e-9, "{w}");
        }
    }

    #[test]
    fn non_greibach_rejected() {
        assert!(matches!(grammar_to_qpda(&catalog::dyck_grammar()), Err(Error::Precondition(_))));
    }

    #[test]
    fn multi_coordinate_grammar_machine() {
        let g = QuantumGrammar::from_rules(
            &["I", "B"],
            &["a", "b"],
            "I",
            2,
            &[
                ("I", &["a", "B"], vec![c(0.5, 0.0), c(0.0, 0.5)]),
                ("I", &["b"], vec![c(0.3, 0.0), c(0.4, 0.0)]),
                ("B", &["b"], vec![c(0.2, 0.1), c(1.0, 0.0)]),
                ("B", &["a", "B"], vec![c(0.5, 0.0), c(-0.5, 0.0)]),
                ("I", &[], vec![c(0.1, 0.0), ZERO]),
            ],
        )
        .unwrap();
        let p = grammar_to_qpda(&g).unwrap();
        for w in words_up_to(&ab(), 6) {
            let (x, y) = (qpda_accept_probability(&p, &w).unwrap(), f_of_word(&g, &w).unwrap());
            assert!((x - y).abs() < 1e-9, "{w}");
        }
    }

    #[test]
    fn expansion_preserves_values() {
        let words = words_up_to(&ab(), 6);
        let leq = build_leq_qpda().into_generalized();
        let e = lemma11_expand(&leq).unwrap();
        assert!(!e.depends_on_below());
        same_f(&leq, &e, &words);
        let m = below_machine();
        let e = lemma11_expand(&m).unwrap();
        assert!(!e.depends_on_below());
        same_f(&m, &e, &words);
        assert!(matches!(lemma11_expand(&build_leq_qpda()), Err(Error::Mode(_))));
    }

    #[test]
    fn word_push_elimination() {
        let dyck = grammar_to_qpda(&gnf_dyck()).unwrap();
        let single = lemma12_convert(&dyck).unwrap();
        assert!(!single.pushes_words());
        for w in words_up_to(&ab(), 6) {
            let f = qpda_accept_probability(&single, &w).unwrap();
            assert!((f - f64::from(u8::from(is_dyck(&w)))).abs() < 1e-9, "{w}");
        }
        let leq = build_leq_qpda().into_generalized();
        let flat = lemma11_expand(&leq).unwrap();
        same_f(&leq, &lemma12_convert(&flat).unwrap(), &words_up_to(&ab(), 6));
    }

    #[test]
    fn long_word_push() {
        let w3 = vec![Symbol::from("x"), Symbol::from("y"), Symbol::from("x")];
        let rules = vec![
            Rule::new("a", "p", None, Action::PushWord(w3), "p", c(0.8, 0.0)),
            Rule::new("a", "p", Some("x"), Action::Pop, "q", c(0.0, 0.6)),
            Rule::new("b", "q", Some("y"), Action::Pop, "p", ONE),
            Rule::new("b", "p", Some("x"), Action::Pop, "p", c(0.5, 0.5)),
            Rule::new("a", "p", Some("y"), Action::Stay, "q", c(0.3, 0.0)),
            Rule::new("b", "q", Some("x"), Action::PushWord(vec![Symbol::from("y"), Symbol::from("y")]), "p", ONE),
        ];
        let p = Qpda::new(
            vec!["p".into(), "q".into()],
            ab(),
            alphabet(&["x", "y"]),
            rules,
            vec![InitEntry { control: "p".into(), stack: vec![], amplitude: ONE }],
            BTreeSet::from(["p".to_string(), "q".to_string()]),
            AcceptanceMode::EmptyStackAndControl,
            false,
            true,
        )
        .unwrap();
        let converted = lemma12_convert(&p).unwrap();
        let probes: Vec<Word> = ["aabx", "aab", "aaba", "abab", "aabbb", "aaab"]
            .iter()
            .map(|s| Word::from_chars(&s.replace('x', "b")))
            .collect();
        same_f(&p, &converted, &probes);
        same_f(&p, &converted, &words_up_to(&ab(), 7));
        assert!(qpda_accept_probability(&p, &Word::from_chars("aabb")).unwrap() > 0.0);
    }

    #[test]
    fn emptiness_in_control() {
        let leq = build_leq_qpda();
        let m = lemma13_convert(&leq).unwrap();
        assert_eq!(m.acceptance(), AcceptanceMode::ControlOnly);
        assert!(m.unitary_claimed());
        same_f(&leq, &m, &words_up_to(&ab(), 6));
        let below = below_machine();
        same_f(&below, &lemma13_convert(&below).unwrap(), &words_up_to(&ab(), 6));
        assert!(matches!(lemma13_convert(&m), Err(Error::Mode(_))));
    }

    #[test]
    fn accept_empty_machine_through_marked_state() {
        let p = Qpda::new(
            vec!["q".into()],
            alphabet(&["a"]),
            vec![],
            vec![],
            vec![InitEntry { control: "q".into(), stack: vec![], amplitude: ONE }],
            BTreeSet::from(["q".to_string()]),
            AcceptanceMode::EmptyStackAndControl,
            true,
            false,
        )
        .unwrap();
        let m = lemma13_convert(&p).unwrap();
        assert_eq!(qpda_accept_probability(&m, &Word::empty()).unwrap(), 1.0);
        assert_eq!(qpda_accept_probability(&m, &Word::from_chars("a")).unwrap(), 0.0);
    }

    #[test]
    fn leq_grammar() {
        let g = qpda_to_grammar(&lemma11_expand(&build_leq_qpda().into_generalized()).unwrap()).unwrap();
        for w in words_up_to(&ab(), 6) {
            let expected = f64::from(u8::from(w.count("a") == w.count("b")));
            assert!((f_of_word(&g, &w).unwrap() - expected).abs() < 1e-9, "{w}");
        }
    }

    #[test]
    fn below_dependence_blocks_grammar() {
        assert!(matches!(qpda_to_grammar(&below_machine()), Err(Error::Precondition(_))));
        let e = lemma11_expand(&below_machine()).unwrap();
        let g = qpda_to_grammar(&e).unwrap();
        for w in words_up_to(&ab(), 6) {
            let (x, y) = (qpda_accept_probability(&e, &w).unwrap(), f_of_word(&g, &w).unwrap());
            assert!((x - y).abs() < 1e-9, "{w}");
        }
    }

    #[test]
    fn grammar_round_trip() {
        let g = gnf_dyck();
        let back = qpda_to_grammar(&grammar_to_qpda(&g).unwrap()).unwrap();
        for w in words_up_to(&ab(), 6) {
            let (x, y) = (f_of_word(&g, &w).unwrap(), f_of_word(&back, &w).unwrap());
            assert!((x - y).abs() < 1e-9, "{w}");
        }
    }

    #[test]
    fn stay_loop_grammar_keeps_empty_word() {
        let p = Qpda::new(
            vec!["q".into()],
            alphabet(&["a"]),
            vec![],
            vec![Rule::new("a", "q", None, Action::Stay, "q", ONE)],
            vec![InitEntry { control: "q".into(), stack: vec![], amplitude: c(0.0, 1.0) }],
            BTreeSet::from(["q".to_string()]),
            AcceptanceMode::EmptyStackAndControl,
            false,
            false,
        )
        .unwrap();
        let g = qpda_to_grammar(&p).unwrap();
        for w in words_up_to(&alphabet(&["a"]), 3) {
            assert!((f_of_word(&g, &w).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_with_automata() {
        let leq = build_leq_qpda();
        let one = tensor_with_qfa(&leq, &constant(1.0, &ab()).unwrap()).unwrap();
        let half = tensor_with_qfa(&leq, &constant(0.5, &ab()).unwrap()).unwrap();
        for w in words_up_to(&ab(), 6) {
            let f = qpda_accept_probability(&leq, &w).unwrap();
            assert!((qpda_accept_probability(&one, &w).unwrap() - f).abs() < 1e-9);
            assert!((qpda_accept_probability(&half, &w).unwrap() - 0.5 * f).abs() < 1e-9);
        }
        let phase = Qfa::new(
            ab(),
            ComplexVector::new(vec![ONE]),
            ab().into_iter()
                .map(|a| (a, crate::algebra::ComplexMatrix::diag(&[c(0.6, 0.8)])))
                .collect(),
            crate::algebra::OrthonormalBasis::standard(1, &[0]).unwrap(),
            false,
        )
        .unwrap();
        let t = tensor_with_qfa(&leq, &phase).unwrap();
        assert!(t.unitary_claimed());
        same_f(&leq, &t, &words_up_to(&ab(), 6));
        let other = constant(1.0, &alphabet(&["a"])).unwrap();
        assert!(matches!(tensor_with_qfa(&leq, &other), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn product_with_rotated_accept_basis() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let q = crate::random::random_qfa(&mut rng, 3, &ab(), 2);
        let p = tensor_with_qfa(&build_leq_qpda(), &q).unwrap();
        for w in words_up_to(&ab(), 6) {
            let expected = qpda_accept_probability(&build_leq_qpda(), &w).unwrap() * q.accept_probability(&w).unwrap();
            assert!((qpda_accept_probability(&p, &w).unwrap() - expected).abs() < 1e-9);
        }
    }
}

//! Quantum push-down automata.
//!
//! The state space is spanned by configurations `(q, σ)` of a control state
//! and a stack word, stored top-leftmost. Each input symbol acts through a
//! list of rules keyed by `(symbol, control, top of stack or empty)`; a rule
//! pushes, pops, replaces the top by a word, or leaves the stack alone, and
//! pops may also look at the symbol below the top.

mod convert;
mod unitarity;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use convert::{
    grammar_to_qpda, lemma11_expand, lemma12_convert, lemma13_convert, qpda_to_grammar,
    tensor_with_qfa,
};
pub use unitarity::{
    basis_states, check_unitarity_truncated, materialize, Configuration, UnitarityReport,
};

use crate::algebra::{Complex, ONE, STRUCTURAL_TOL};
use crate::error::{Error, Result};
use crate::word::{Symbol, Word};

/// Amplitudes below this magnitude are dropped from sparse states.
pub const PRUNE_TOL: f64 = 1e-15;

/// Stack symbol reserved for padding inside composite symbols.
pub const DUMMY: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Push(Symbol),
    /// Replace the top symbol by a word (top-leftmost); on an empty stack the
    /// word is pushed. An empty word removes the top.
    PushWord(Vec<Symbol>),
    Pop,
    Stay,
}

/// Condition on the symbol below the top, consulted by pops only.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Below {
    Any,
    Empty,
    Sym(Symbol),
}

impl Below {
    fn matches(&self, below: Option<&Symbol>) -> bool {
        match (self, below) {
            (Below::Any, _) => true,
            (Below::Empty, None) => true,
            (Below::Sym(s), Some(b)) => s == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub input: Symbol,
    pub from: String,
    pub top: Option<Symbol>,
    pub action: Action,
    pub below: Below,
    pub to: String,
    pub amplitude: Complex,
}

impl Rule {
    pub fn new(
        input: impl Into<Symbol>,
        from: &str,
        top: Option<&str>,
        action: Action,
        to: &str,
        amplitude: Complex,
    ) -> Self {
        Self {
            input: input.into(),
            from: from.to_string(),
            top: top.map(Symbol::from),
            action,
            below: Below::Any,
            to: to.to_string(),
            amplitude,
        }
    }

    pub fn with_below(mut self, below: Below) -> Self {
        self.below = below;
        self
    }

    fn key(&self) -> (Symbol, String, Option<Symbol>, Action, Below, String) {
        (
            self.input.clone(),
            self.from.clone(),
            self.top.clone(),
            self.action.clone(),
            self.below.clone(),
            self.to.clone(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitEntry {
    pub control: String,
    /// Top-leftmost.
    pub stack: Vec<Symbol>,
    pub amplitude: Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptanceMode {
    /// Accept in an accepting control with an empty stack.
    EmptyStackAndControl,
    /// Accept in an accepting control with any stack.
    ControlOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Qpda {
    controls: Vec<String>,
    input_alphabet: Vec<Symbol>,
    stack_alphabet: Vec<Symbol>,
    rules: Vec<Rule>,
    s_init: Vec<InitEntry>,
    accept: BTreeSet<String>,
    acceptance: AcceptanceMode,
    unitary_claimed: bool,
    pushes_words: bool,
}

impl Qpda {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        controls: Vec<String>,
        input_alphabet: Vec<Symbol>,
        stack_alphabet: Vec<Symbol>,
        rules: Vec<Rule>,
        s_init: Vec<InitEntry>,
        accept: BTreeSet<String>,
        acceptance: AcceptanceMode,
        unitary_claimed: bool,
        pushes_words: bool,
    ) -> Result<Self> {
        let control_set: BTreeSet<&String> = controls.iter().collect();
        let inputs: BTreeSet<&Symbol> = input_alphabet.iter().collect();
        let stacks: BTreeSet<&Symbol> = stack_alphabet.iter().collect();
        if control_set.len() != controls.len()
            || inputs.len() != input_alphabet.len()
            || stacks.len() != stack_alphabet.len()
        {
            return Err(Error::Invariant("duplicate control or symbol name".into()));
        }
        let control = |c: &String| {
            if control_set.contains(c) {
                Ok(())
            } else {
                Err(Error::Invariant(format!("unknown control `{c}`")))
            }
        };
        let stack_sym = |s: &Symbol| {
            if stacks.contains(s) {
                Ok(())
            } else {
                Err(Error::Invariant(format!("unknown stack symbol `{s}`")))
            }
        };
        let mut keys = BTreeSet::new();
        for r in &rules {
            if !inputs.contains(&r.input) {
                return Err(Error::UnknownSymbol(r.input.to_string()));
            }
            control(&r.from)?;
            control(&r.to)?;
            if let Some(t) = &r.top {
                stack_sym(t)?;
            }
            match &r.action {
                Action::Push(s) => stack_sym(s)?,
                Action::PushWord(w) => {
                    if !pushes_words {
                        return Err(Error::Invariant(
                            "word-pushing rule in a machine that pushes single symbols".into(),
                        ));
                    }
                    w.iter().try_for_each(stack_sym)?;
                }
                Action::Pop => {
                    if r.top.is_none() {
                        return Err(Error::Invariant(format!(
                            "rule from `{}` pops an empty stack",
                            r.from
                        )));
                    }
                }
                Action::Stay => {}
            }
            match &r.below {
                Below::Any => {}
                other => {
                    if r.action != Action::Pop {
                        return Err(Error::Invariant(
                            "only pop rules may depend on the symbol below the top".into(),
                        ));
                    }
                    if let Below::Sym(s) = other {
                        stack_sym(s)?;
                    }
                }
            }
            if !r.amplitude.re.is_finite() || !r.amplitude.im.is_finite() {
                return Err(Error::Invariant("non-finite rule amplitude".into()));
            }
            if !keys.insert(r.key()) {
                return Err(Error::Invariant(format!(
                    "duplicate rule on `{}` from `{}`",
                    r.input, r.from
                )));
            }
        }
        let mut init_keys = BTreeSet::new();
        for e in &s_init {
            control(&e.control)?;
            e.stack.iter().try_for_each(stack_sym)?;
            if !init_keys.insert((e.control.clone(), e.stack.clone())) {
                return Err(Error::Invariant("duplicate initial configuration".into()));
            }
        }
        for c in &accept {
            control(c)?;
        }
        if unitary_claimed {
            let norm: f64 = s_init.iter().map(|e| e.amplitude.norm_sqr()).sum();
            if (norm - 1.0).abs() >= STRUCTURAL_TOL {
                return Err(Error::Invariant(format!(
                    "unitary machine needs a unit initial state, norm² is {norm}"
                )));
            }
        }
        Ok(Self {
            controls,
            input_alphabet,
            stack_alphabet,
            rules,
            s_init,
            accept,
            acceptance,
            unitary_claimed,
            pushes_words,
        })
    }

    pub fn controls(&self) -> &[String] {
        &self.controls
    }

    pub fn input_alphabet(&self) -> &[Symbol] {
        &self.input_alphabet
    }

    pub fn stack_alphabet(&self) -> &[Symbol] {
        &self.stack_alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn s_init(&self) -> &[InitEntry] {
        &self.s_init
    }

    pub fn accept_controls(&self) -> &BTreeSet<String> {
        &self.accept
    }

    pub fn acceptance(&self) -> AcceptanceMode {
        self.acceptance
    }

    pub fn unitary_claimed(&self) -> bool {
        self.unitary_claimed
    }

    pub fn pushes_words(&self) -> bool {
        self.pushes_words
    }

    pub fn into_generalized(self) -> Self {
        Self {
            unitary_claimed: false,
            ..self
        }
    }

    /// True if some pop rule looks below the top.
    pub fn depends_on_below(&self) -> bool {
        self.rules.iter().any(|r| r.below != Below::Any)
    }

    /// Longest word a single rule can leave in place of the top symbol.
    pub fn max_push_len(&self) -> usize {
        self.rules
            .iter()
            .map(|r| match &r.action {
                Action::Push(_) => 1,
                Action::PushWord(w) => w.len(),
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn initial_state(&self) -> SparseState {
        let mut s = SparseState::new();
        for e in &self.s_init {
            s.add(&e.control, e.stack.clone(), e.amplitude);
        }
        s
    }

    fn check_input(&self, a: &Symbol) -> Result<()> {
        if self.input_alphabet.contains(a) {
            Ok(())
        } else {
            Err(Error::UnknownSymbol(a.to_string()))
        }
    }

    /// Rules indexed by `(input, from, top)`.
    fn index(&self) -> HashMap<(&Symbol, &str, Option<&Symbol>), Vec<&Rule>> {
        let mut map: HashMap<_, Vec<&Rule>> = HashMap::new();
        for r in &self.rules {
            map.entry((&r.input, r.from.as_str(), r.top.as_ref())).or_default().push(r);
        }
        map
    }

    /// Squared norm of the accepted part of `s`.
    pub fn accepted_mass(&self, s: &SparseState) -> f64 {
        s.iter()
            .filter(|((q, stack), _)| {
                self.accept.contains(q)
                    && (self.acceptance == AcceptanceMode::ControlOnly || stack.is_empty())
            })
            .map(|(_, z)| z.norm_sqr())
            .fold(0.0, |acc, x| acc + x)
    }
}

/// A finite superposition of configurations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseState {
    amplitudes: BTreeMap<(String, Vec<Symbol>), Complex>,
}

impl SparseState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn basis(control: &str, stack: Vec<Symbol>) -> Self {
        let mut s = Self::new();
        s.add(control, stack, ONE);
        s
    }

    /// Adds `amplitude` to the configuration, dropping it if the total
    /// becomes negligible.
    pub fn add(&mut self, control: &str, stack: Vec<Symbol>, amplitude: Complex) {
        let key = (control.to_string(), stack);
        let total = self.amplitudes.get(&key).copied().unwrap_or_default() + amplitude;
        if total.norm() < PRUNE_TOL {
            self.amplitudes.remove(&key);
        } else {
            self.amplitudes.insert(key, total);
        }
    }

    pub fn get(&self, control: &str, stack: &[Symbol]) -> Complex {
        self.amplitudes
            .get(&(control.to_string(), stack.to_vec()))
            .copied()
            .unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, Vec<Symbol>), &Complex)> {
        self.amplitudes.iter()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|z| z.norm_sqr()).fold(0.0, |acc, x| acc + x)
    }

    pub fn scale(&self, c: Complex) -> Self {
        let mut out = Self::new();
        for ((q, s), z) in &self.amplitudes {
            out.add(q, s.clone(), z * c);
        }
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((q, s), z) in &other.amplitudes {
            out.add(q, s.clone(), *z);
        }
        out
    }

    /// Largest coefficient difference between two states.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let keys: BTreeSet<_> = self.amplitudes.keys().chain(other.amplitudes.keys()).collect();
        keys.into_iter()
            .map(|k| {
                let a = self.amplitudes.get(k).copied().unwrap_or_default();
                let b = other.amplitudes.get(k).copied().unwrap_or_default();
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_stack_len(&self) -> usize {
        self.amplitudes.keys().map(|(_, s)| s.len()).max().unwrap_or(0)
    }
}

/// The stack after applying `action` to `stack` (top-leftmost).
pub(crate) fn apply_action(action: &Action, stack: &[Symbol]) -> Vec<Symbol> {
    match action {
        Action::Push(s) => {
            let mut out = Vec::with_capacity(stack.len() + 1);
            out.push(s.clone());
            out.extend_from_slice(stack);
            out
        }
        Action::Pop => stack[1..].to_vec(),
        Action::Stay => stack.to_vec(),
        Action::PushWord(w) => {
            let rest = if stack.is_empty() { stack } else { &stack[1..] };
            let mut out = w.clone();
            out.extend_from_slice(rest);
            out
        }
    }
}

fn step_indexed(
    index: &HashMap<(&Symbol, &str, Option<&Symbol>), Vec<&Rule>>,
    s: &SparseState,
    a: &Symbol,
) -> SparseState {
    let mut out = SparseState::new();
    for ((q, stack), amp) in s.iter() {
        let Some(rules) = index.get(&(a, q.as_str(), stack.first())) else {
            continue;
        };
        for r in rules {
            if r.action == Action::Pop && !r.below.matches(stack.get(1)) {
                continue;
            }
            out.add(&r.to, apply_action(&r.action, stack), amp * r.amplitude);
        }
    }
    out
}

/// One application of `U_a`.
pub fn qpda_step(p: &Qpda, s: &SparseState, a: &Symbol) -> Result<SparseState> {
    p.check_input(a)?;
    Ok(step_indexed(&p.index(), s, a))
}

/// The state after reading `w` from the initial state.
pub fn qpda_run(p: &Qpda, w: &Word) -> Result<SparseState> {
    for a in w {
        p.check_input(a)?;
    }
    let index = p.index();
    let mut s = p.initial_state();
    for a in w {
        s = step_indexed(&index, &s, a);
    }
    Ok(s)
}

/// Acceptance probability of `w` under the machine's acceptance mode.
pub fn qpda_accept_probability(p: &Qpda, w: &Word) -> Result<f64> {
    Ok(p.accepted_mass(&qpda_run(p, w)?))
}

/// Squared norms of the state after each prefix of `w`, starting with the
/// initial state.
pub fn norm_trace(p: &Qpda, w: &Word) -> Result<Vec<f64>> {
    for a in w {
        p.check_input(a)?;
    }
    let index = p.index();
    let mut s = p.initial_state();
    let mut out = vec![s.norm_sqr()];
    for a in w {
        s = step_indexed(&index, &s, a);
        out.push(s.norm_sqr());
    }
    Ok(out)
}

/// Two controls `A`, `B` and one stack symbol `x`. Reading `a` moves
/// `(A, xⁿ) → (A, xⁿ⁺¹)`, `(B, x) → (A, ε)`, `(B, xⁿ⁺¹) → (B, xⁿ)` and fixes
/// `(B, ε)`; reading `b` is the inverse map. Starting from `(A, ε)` the
/// machine returns to `(A, ε)` exactly when the counts of `a` and `b` agree.
pub fn build_leq_qpda() -> Qpda {
    let x = Some("x");
    let push = || Action::Push(Symbol::from("x"));
    let rules = vec![
        Rule::new("a", "A", None, push(), "A", ONE),
        Rule::new("a", "A", x, push(), "A", ONE),
        Rule::new("a", "B", x, Action::Pop, "A", ONE).with_below(Below::Empty),
        Rule::new("a", "B", x, Action::Pop, "B", ONE).with_below(Below::Sym(Symbol::from("x"))),
        Rule::new("a", "B", None, Action::Stay, "B", ONE),
        Rule::new("b", "A", x, Action::Pop, "A", ONE),
        Rule::new("b", "A", None, push(), "B", ONE),
        Rule::new("b", "B", x, push(), "B", ONE),
        Rule::new("b", "B", None, Action::Stay, "B", ONE),
    ];
    Qpda::new(
        vec!["A".into(), "B".into()],
        vec![Symbol::from("a"), Symbol::from("b")],
        vec![Symbol::from("x")],
        rules,
        vec![InitEntry {
            control: "A".into(),
            stack: vec![],
            amplitude: ONE,
        }],
        BTreeSet::from(["A".to_string()]),
        AcceptanceMode::EmptyStackAndControl,
        true,
        false,
    )
    .expect("valid machine")
}

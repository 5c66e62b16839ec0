//! Quantum (amplitude-weighted) context-free grammars.
//!
//! Every production carries a vector of `n` complex amplitudes. The amplitude
//! vector of a derivation is the componentwise product along the derivation,
//! a word's amplitude vector `c(w)` sums over all derivation trees, and the
//! word's probability is `f(w) = Σ_k |c_k(w)|²`.

mod eval;
mod interference;
mod normal_form;
mod regular;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use eval::{derive_amplitudes, f_of_word, gnf_amplitudes, span_amplitudes};
pub use interference::{
    embed_unambiguous, grammar_sum, symmetric_difference, three_way_interference, ClassicalGrammar,
};
pub use normal_form::{
    check_epsilon_restriction, eliminate_left_recursion, eliminate_unit_productions, to_chomsky,
    to_greibach,
};
pub use regular::{normalize_regular, qfa_to_regular_grammar, regular_to_qfa};

use crate::algebra::{Complex, ComplexVector};
use crate::error::{Error, Result};
use crate::word::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GSymbol {
    Var(String),
    Term(Symbol),
}

impl GSymbol {
    pub fn var(name: impl Into<String>) -> Self {
        GSymbol::Var(name.into())
    }

    pub fn term(name: impl Into<Symbol>) -> Self {
        GSymbol::Term(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            GSymbol::Var(v) => v,
            GSymbol::Term(t) => t.as_str(),
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            GSymbol::Var(v) => Some(v),
            GSymbol::Term(_) => None,
        }
    }

    pub fn is_term(&self) -> bool {
        matches!(self, GSymbol::Term(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Production {
    pub lhs: String,
    pub rhs: Vec<GSymbol>,
    pub amplitudes: ComplexVector,
}

impl Production {
    pub fn is_unit(&self) -> bool {
        self.rhs.len() == 1 && !self.rhs[0].is_term()
    }

    pub fn is_epsilon(&self) -> bool {
        self.rhs.is_empty()
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rhs: Vec<&str> = self.rhs.iter().map(GSymbol::name).collect();
        let rhs = if rhs.is_empty() { "ε".to_string() } else { rhs.join(" ") };
        write!(f, "{} -> {}", self.lhs, rhs)
    }
}

/// Structural classes a grammar can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GrammarForm {
    General,
    Chomsky,
    Greibach,
    Regular,
}

impl fmt::Display for GrammarForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrammarForm::General => "general",
            GrammarForm::Chomsky => "chomsky",
            GrammarForm::Greibach => "greibach",
            GrammarForm::Regular => "regular",
        })
    }
}

/// Accumulates productions, summing amplitudes of repeated `(lhs, rhs)` pairs.
pub(crate) type ProductionMap = BTreeMap<(String, Vec<GSymbol>), ComplexVector>;

pub(crate) fn accumulate(map: &mut ProductionMap, lhs: &str, rhs: Vec<GSymbol>, amps: ComplexVector) {
    match map.entry((lhs.to_string(), rhs)) {
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = e.get().add(&amps).expect("same dimensionality");
            e.insert(sum);
        }
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(amps);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumGrammar {
    variables: Vec<String>,
    terminals: Vec<Symbol>,
    initial: String,
    dimensionality: usize,
    productions: Vec<Production>,
}

impl QuantumGrammar {
    pub fn new(
        variables: Vec<String>,
        terminals: Vec<Symbol>,
        initial: impl Into<String>,
        dimensionality: usize,
        productions: Vec<Production>,
    ) -> Result<Self> {
        let initial = initial.into();
        if dimensionality == 0 {
            return Err(Error::Invariant("dimensionality must be at least 1".into()));
        }
        let vars: BTreeSet<&str> = variables.iter().map(String::as_str).collect();
        let terms: BTreeSet<&str> = terminals.iter().map(Symbol::as_str).collect();
        if vars.len() != variables.len() || terms.len() != terminals.len() {
            return Err(Error::Invariant("duplicate variable or terminal name".into()));
        }
        if let Some(both) = vars.intersection(&terms).next() {
            return Err(Error::Invariant(format!(
                "`{both}` is both a variable and a terminal"
            )));
        }
        if !vars.contains(initial.as_str()) {
            return Err(Error::Invariant(format!("initial variable `{initial}` is not declared")));
        }
        let mut seen = BTreeSet::new();
        for p in &productions {
            if !vars.contains(p.lhs.as_str()) {
                return Err(Error::Invariant(format!("production {p} has undeclared lhs")));
            }
            for s in &p.rhs {
                let known = match s {
                    GSymbol::Var(v) => vars.contains(v.as_str()),
                    GSymbol::Term(t) => terms.contains(t.as_str()),
                };
                if !known {
                    return Err(Error::Invariant(format!(
                        "production {p} uses undeclared symbol `{}`",
                        s.name()
                    )));
                }
            }
            if p.amplitudes.dim() != dimensionality {
                return Err(Error::Invariant(format!(
                    "production {p} has {} amplitudes, dimensionality is {dimensionality}",
                    p.amplitudes.dim()
                )));
            }
            if !p.amplitudes.is_finite() {
                return Err(Error::Invariant(format!("production {p} has non-finite amplitudes")));
            }
            if !seen.insert((p.lhs.clone(), p.rhs.clone())) {
                return Err(Error::Invariant(format!("production {p} is listed twice")));
            }
        }
        Ok(Self {
            variables,
            terminals,
            initial,
            dimensionality,
            productions,
        })
    }

    /// Builds a grammar from `(lhs, rhs names, amplitudes)` rules; a rhs name
    /// is a terminal if it is listed in `terminals`, otherwise a variable.
    pub fn from_rules(
        variables: &[&str],
        terminals: &[&str],
        initial: &str,
        dimensionality: usize,
        rules: &[(&str, &[&str], Vec<Complex>)],
    ) -> Result<Self> {
        let terms: BTreeSet<&str> = terminals.iter().copied().collect();
        let productions = rules
            .iter()
            .map(|(lhs, rhs, amps)| Production {
                lhs: lhs.to_string(),
                rhs: rhs
                    .iter()
                    .map(|s| {
                        if terms.contains(s) {
                            GSymbol::term(*s)
                        } else {
                            GSymbol::var(*s)
                        }
                    })
                    .collect(),
                amplitudes: ComplexVector::new(amps.clone()),
            })
            .collect();
        Self::new(
            variables.iter().map(|s| s.to_string()).collect(),
            terminals.iter().map(|&s| Symbol::from(s)).collect(),
            initial,
            dimensionality,
            productions,
        )
    }

    /// Builds from an accumulated production map, dropping all-zero entries.
    pub(crate) fn from_map(
        variables: Vec<String>,
        terminals: Vec<Symbol>,
        initial: String,
        dimensionality: usize,
        map: ProductionMap,
    ) -> Result<Self> {
        let productions = map
            .into_iter()
            .filter(|(_, amps)| !amps.is_zero())
            .map(|((lhs, rhs), amplitudes)| Production {
                lhs,
                rhs,
                amplitudes,
            })
            .collect();
        Self::new(variables, terminals, initial, dimensionality, productions)
    }

    pub(crate) fn to_map(&self) -> ProductionMap {
        let mut map = ProductionMap::new();
        for p in &self.productions {
            accumulate(&mut map, &p.lhs, p.rhs.clone(), p.amplitudes.clone());
        }
        map
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn terminals(&self) -> &[Symbol] {
        &self.terminals
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    pub fn dimensionality(&self) -> usize {
        self.dimensionality
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    /// Productions with at least one nonzero amplitude.
    pub fn active_productions(&self) -> impl Iterator<Item = &Production> {
        self.productions.iter().filter(|p| !p.amplitudes.is_zero())
    }

    pub fn productions_of<'a>(&'a self, v: &'a str) -> impl Iterator<Item = &'a Production> + 'a {
        self.active_productions().filter(move |p| p.lhs == v)
    }

    /// Amplitude vector of the production `lhs → rhs`, zero if absent.
    pub fn amplitude(&self, lhs: &str, rhs: &[GSymbol]) -> ComplexVector {
        self.productions
            .iter()
            .find(|p| p.lhs == lhs && p.rhs == rhs)
            .map(|p| p.amplitudes.clone())
            .unwrap_or_else(|| ComplexVector::zeros(self.dimensionality))
    }

    pub fn same_terminals(&self, other: &QuantumGrammar) -> bool {
        let a: BTreeSet<&Symbol> = self.terminals.iter().collect();
        let b: BTreeSet<&Symbol> = other.terminals.iter().collect();
        a == b
    }

    pub(crate) fn initial_on_rhs(&self) -> bool {
        self.active_productions()
            .any(|p| p.rhs.iter().any(|s| s.as_var() == Some(self.initial.as_str())))
    }

    /// The start-variable ε-production exception shared by the normal forms.
    fn is_start_epsilon(&self, p: &Production) -> bool {
        p.is_epsilon() && p.lhs == self.initial && !self.initial_on_rhs()
    }

    /// Every rhs is one terminal or two variables (plus the start exception).
    pub fn is_chomsky(&self) -> bool {
        self.active_productions().all(|p| {
            self.is_start_epsilon(p)
                || matches!(p.rhs.as_slice(), [GSymbol::Term(_)])
                || matches!(p.rhs.as_slice(), [GSymbol::Var(_), GSymbol::Var(_)])
        })
    }

    /// Every rhs is a terminal followed by variables (plus the start exception).
    pub fn is_greibach(&self) -> bool {
        self.active_productions().all(|p| {
            self.is_start_epsilon(p)
                || matches!(p.rhs.split_first(), Some((GSymbol::Term(_), rest)) if rest.iter().all(|s| !s.is_term()))
        })
    }

    /// Every rhs is a terminal word optionally followed by one variable.
    pub fn is_regular(&self) -> bool {
        self.active_productions().all(|p| {
            let body = match p.rhs.last() {
                Some(GSymbol::Var(_)) => &p.rhs[..p.rhs.len() - 1],
                _ => &p.rhs[..],
            };
            body.iter().all(GSymbol::is_term)
        })
    }

    /// Regular with every rhs `a v` or `a` (plus the start exception).
    pub fn is_normalized_regular(&self) -> bool {
        self.active_productions().all(|p| {
            self.is_start_epsilon(p)
                || matches!(p.rhs.as_slice(), [GSymbol::Term(_)])
                || matches!(p.rhs.as_slice(), [GSymbol::Term(_), GSymbol::Var(_)])
        })
    }

    pub fn forms(&self) -> Vec<GrammarForm> {
        let mut out = vec![GrammarForm::General];
        if self.is_chomsky() {
            out.push(GrammarForm::Chomsky);
        }
        if self.is_greibach() {
            out.push(GrammarForm::Greibach);
        }
        if self.is_regular() {
            out.push(GrammarForm::Regular);
        }
        out
    }

    /// Drops variables not reachable from the initial variable.
    pub fn prune_unreachable(&self) -> Result<Self> {
        let mut reach = BTreeSet::from([self.initial.clone()]);
        let mut stack = vec![self.initial.clone()];
        while let Some(v) = stack.pop() {
            for p in self.productions_of(&v) {
                for s in &p.rhs {
                    if let GSymbol::Var(u) = s {
                        if reach.insert(u.clone()) {
                            stack.push(u.clone());
                        }
                    }
                }
            }
        }
        let variables = self
            .variables
            .iter()
            .filter(|v| reach.contains(*v))
            .cloned()
            .collect();
        let productions = self
            .active_productions()
            .filter(|p| reach.contains(&p.lhs))
            .cloned()
            .collect();
        Self::new(
            variables,
            self.terminals.clone(),
            self.initial.clone(),
            self.dimensionality,
            productions,
        )
    }

    /// Drops variables that derive no terminal word, then unreachable ones.
    pub fn trim(&self) -> Result<Self> {
        let mut productive: BTreeSet<&str> = BTreeSet::new();
        loop {
            let before = productive.len();
            for p in self.active_productions() {
                if p.rhs.iter().all(|s| match s {
                    GSymbol::Term(_) => true,
                    GSymbol::Var(v) => productive.contains(v.as_str()),
                }) {
                    productive.insert(p.lhs.as_str());
                }
            }
            if productive.len() == before {
                break;
            }
        }
        let keep = |v: &str| productive.contains(v) || v == self.initial;
        let productions = self
            .active_productions()
            .filter(|p| keep(&p.lhs) && p.rhs.iter().all(|s| s.as_var().is_none_or(keep)))
            .cloned()
            .collect();
        let variables = self.variables.iter().filter(|v| keep(v)).cloned().collect();
        Self::new(
            variables,
            self.terminals.clone(),
            self.initial.clone(),
            self.dimensionality,
            productions,
        )?
        .prune_unreachable()
    }
}

impl fmt::Display for QuantumGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "initial {} (dimensionality {})", self.initial, self.dimensionality)?;
        for p in &self.productions {
            let amps: Vec<String> = p.amplitudes.iter().map(|z| format!("{z}")).collect();
            writeln!(f, "  {p}  [{}]", amps.join(", "))?;
        }
        Ok(())
    }
}

/// A name based on `base` that collides with nothing in `taken`; the result
/// is added to `taken`.
pub(crate) fn fresh_name(base: &str, taken: &mut BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    taken.insert(name.clone());
    name
}

pub(crate) fn taken_names(g: &QuantumGrammar) -> BTreeSet<String> {
    g.variables
        .iter()
        .cloned()
        .chain(g.terminals.iter().map(|t| t.to_string()))
        .collect()
}

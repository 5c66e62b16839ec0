//! JSON interchange format.
//!
//! Every document is an object with a `"type"` tag: `"qfa"`, `"dfa"`,
//! `"grammar"`, `"qpda"` or `"bilinear"`. Complex numbers are `[re, im]`
//! pairs and matrices are arrays of rows. Schema errors carry the JSON
//! pointer of the offending value.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use crate::algebra::{Complex, ComplexMatrix, ComplexVector, OrthonormalBasis, STRUCTURAL_TOL};
use crate::error::{Error, Result};
use crate::grammar::{GSymbol, Production, QuantumGrammar};
use crate::qfa::{Dfa, Qfa};
use crate::qpda::{AcceptanceMode, Action, Below, InitEntry, Qpda, Rule, DUMMY};
use crate::stochastic::{BilinearForm, FormKind};
use crate::word::Symbol;

#[derive(Debug, Clone, PartialEq)]
pub enum Machine {
    Qfa(Qfa),
    Dfa(Dfa),
    Grammar(QuantumGrammar),
    Qpda(Qpda),
    Bilinear(BilinearForm),
}

impl Machine {
    pub fn kind(&self) -> &'static str {
        match self {
            Machine::Qfa(_) => "qfa",
            Machine::Dfa(_) => "dfa",
            Machine::Grammar(_) => "grammar",
            Machine::Qpda(_) => "qpda",
            Machine::Bilinear(_) => "bilinear",
        }
    }
}

fn complex_json(z: &Complex) -> Value {
    json!([z.re, z.im])
}

fn vector_json(v: &ComplexVector) -> Value {
    Value::Array(v.iter().map(complex_json).collect())
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        m.to_rows()
            .iter()
            .map(|r| Value::Array(r.iter().map(complex_json).collect()))
            .collect(),
    )
}

fn names_json<'a, I: IntoIterator<Item = &'a str>>(names: I) -> Value {
    Value::Array(names.into_iter().map(|s| Value::String(s.to_string())).collect())
}

fn symbols_json(symbols: &[Symbol]) -> Value {
    names_json(symbols.iter().map(Symbol::as_str))
}

pub fn qfa_to_json(q: &Qfa) -> Value {
    let transitions: Map<String, Value> = q
        .transitions()
        .iter()
        .map(|(a, u)| (a.to_string(), matrix_json(u)))
        .collect();
    json!({
        "type": "qfa",
        "alphabet": symbols_json(q.alphabet()),
        "s_init": vector_json(q.s_init()),
        "transitions": transitions,
        "accept_basis": q.accept_basis().vectors().iter().map(vector_json).collect::<Vec<_>>(),
        "generalized": q.is_generalized(),
    })
}

pub fn dfa_to_json(d: &Dfa) -> Value {
    let transitions: Vec<Value> = d
        .transitions()
        .iter()
        .map(|(f, a, t)| json!([f, a.as_str(), t]))
        .collect();
    json!({
        "type": "dfa",
        "states": d.states(),
        "alphabet": symbols_json(d.alphabet()),
        "transitions": transitions,
        "init": d.states()[d.init()],
        "accepting": d.accepting().iter().map(|&i| d.states()[i].clone()).collect::<Vec<_>>(),
    })
}

pub fn grammar_to_json(g: &QuantumGrammar) -> Value {
    let productions: Vec<Value> = g
        .productions()
        .iter()
        .map(|p| {
            json!({
                "lhs": p.lhs,
                "rhs": names_json(p.rhs.iter().map(GSymbol::name)),
                "amplitudes": vector_json(&p.amplitudes),
            })
        })
        .collect();
    json!({
        "type": "grammar",
        "variables": g.variables(),
        "terminals": symbols_json(g.terminals()),
        "initial": g.initial(),
        "dimensionality": g.dimensionality(),
        "productions": productions,
    })
}

fn action_json(a: &Action) -> Value {
    match a {
        Action::Push(s) => json!({ "push": s.as_str() }),
        Action::PushWord(w) => json!({ "push_word": symbols_json(w) }),
        Action::Pop => json!("pop"),
        Action::Stay => json!("stay"),
    }
}

pub fn qpda_to_json(p: &Qpda) -> Value {
    let rules: Vec<Value> = p
        .rules()
        .iter()
        .map(|r| {
            let mut obj = json!({
                "input": r.input.as_str(),
                "from": r.from,
                "top": r.top.as_ref().map(Symbol::as_str),
                "action": action_json(&r.action),
                "to": r.to,
                "amplitude": complex_json(&r.amplitude),
            });
            match &r.below {
                Below::Any => {}
                Below::Empty => {
                    obj["below"] = json!("empty");
                }
                Below::Sym(s) => {
                    obj["below"] = json!({ "symbol": s.as_str() });
                }
            }
            obj
        })
        .collect();
    let s_init: Vec<Value> = p
        .s_init()
        .iter()
        .map(|e| {
            json!({
                "control": e.control,
                "stack": symbols_json(&e.stack),
                "amplitude": complex_json(&e.amplitude),
            })
        })
        .collect();
    json!({
        "type": "qpda",
        "controls": p.controls(),
        "input_alphabet": symbols_json(p.input_alphabet()),
        "stack_alphabet": symbols_json(p.stack_alphabet()),
        "rules": rules,
        "s_init": s_init,
        "accept": p.accept_controls().iter().collect::<Vec<_>>(),
        "acceptance": match p.acceptance() {
            AcceptanceMode::EmptyStackAndControl => "empty_stack_and_control",
            AcceptanceMode::ControlOnly => "control_only",
        },
        "unitary": p.unitary_claimed(),
        "pushes_words": p.pushes_words(),
    })
}

pub fn bilinear_to_json(b: &BilinearForm) -> Value {
    let matrices: Map<String, Value> = b
        .matrices
        .iter()
        .map(|(a, m)| (a.to_string(), matrix_json(m)))
        .collect();
    json!({
        "type": "bilinear",
        "kind": b.kind,
        "pi": vector_json(&b.pi),
        "matrices": matrices,
        "eta": vector_json(&b.eta),
    })
}

pub fn machine_to_json(m: &Machine) -> Value {
    match m {
        Machine::Qfa(q) => qfa_to_json(q),
        Machine::Dfa(d) => dfa_to_json(d),
        Machine::Grammar(g) => grammar_to_json(g),
        Machine::Qpda(p) => qpda_to_json(p),
        Machine::Bilinear(b) => bilinear_to_json(b),
    }
}

pub fn to_json_string(m: &Machine) -> String {
    serde_json::to_string_pretty(&machine_to_json(m)).expect("values serialize")
}

/// A JSON value together with its pointer, for error reporting.
#[derive(Clone, Copy)]
struct At<'a> {
    value: &'a Value,
    path: &'a str,
}

impl<'a> At<'a> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::schema(self.path, message))
    }

    fn object(&self) -> Result<&'a Map<String, Value>> {
        self.value
            .as_object()
            .map_or_else(|| self.fail("expected an object"), Ok)
    }

    fn array(&self) -> Result<&'a Vec<Value>> {
        self.value
            .as_array()
            .map_or_else(|| self.fail("expected an array"), Ok)
    }

    fn string(&self) -> Result<&'a str> {
        self.value
            .as_str()
            .map_or_else(|| self.fail("expected a string"), Ok)
    }

    fn boolean(&self) -> Result<bool> {
        self.value
            .as_bool()
            .map_or_else(|| self.fail("expected a boolean"), Ok)
    }

    fn number(&self) -> Result<f64> {
        self.value
            .as_f64()
            .map_or_else(|| self.fail("expected a number"), Ok)
    }

    fn count(&self) -> Result<usize> {
        self.value
            .as_u64()
            .and_then(|n| usize::try_from(n).ok())
            .map_or_else(|| self.fail("expected a non-negative integer"), Ok)
    }
}

fn child_path(parent: &str, key: &str) -> String {
    format!("{parent}/{}", key.replace('~', "~0").replace('/', "~1"))
}

fn get<T>(
    obj: &Map<String, Value>,
    parent: &str,
    key: &str,
    f: impl for<'b> FnOnce(At<'b>) -> Result<T>,
) -> Result<T> {
    let path = child_path(parent, key);
    match obj.get(key) {
        Some(v) => f(At { value: v, path: &path }),
        None => Err(Error::schema(path, "missing field")),
    }
}

fn items<T>(at: At<'_>, mut f: impl for<'b> FnMut(At<'b>) -> Result<T>) -> Result<Vec<T>> {
    at.array()?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let path = format!("{}/{i}", at.path);
            f(At { value: v, path: &path })
        })
        .collect()
}

fn parse_complex(at: At<'_>) -> Result<Complex> {
    let parts = at.array()?;
    if parts.len() != 2 {
        return at.fail("expected a [re, im] pair");
    }
    let re = At { value: &parts[0], path: &format!("{}/0", at.path) }.number()?;
    let im = At { value: &parts[1], path: &format!("{}/1", at.path) }.number()?;
    Ok(Complex::new(re, im))
}

fn parse_vector(at: At<'_>) -> Result<ComplexVector> {
    Ok(ComplexVector::new(items(at, parse_complex)?))
}

fn parse_matrix(at: At<'_>) -> Result<ComplexMatrix> {
    let rows = items(at, |r| items(r, parse_complex))?;
    ComplexMatrix::from_rows(rows).or_else(|e| at.fail(e.to_string()))
}

fn parse_names(at: At<'_>) -> Result<Vec<String>> {
    let names = items(at, |s| s.string().map(str::to_string))?;
    let distinct: BTreeSet<&String> = names.iter().collect();
    if distinct.len() != names.len() {
        return at.fail("names must be distinct");
    }
    Ok(names)
}

fn parse_symbols(at: At<'_>) -> Result<Vec<Symbol>> {
    items(at, |s| s.string().map(Symbol::from))
}

fn parse_matrix_map(at: At<'_>) -> Result<BTreeMap<Symbol, ComplexMatrix>> {
    at.object()?
        .iter()
        .map(|(k, v)| {
            let path = child_path(at.path, k);
            Ok((Symbol::from(k.as_str()), parse_matrix(At { value: v, path: &path })?))
        })
        .collect()
}

fn parse_qfa(obj: &Map<String, Value>) -> Result<Qfa> {
    let alphabet = get(obj, "", "alphabet", parse_symbols)?;
    let s_init = get(obj, "", "s_init", parse_vector)?;
    let transitions = get(obj, "", "transitions", parse_matrix_map)?;
    let vectors = get(obj, "", "accept_basis", |at| items(at, parse_vector))?;
    let generalized = get(obj, "", "generalized", |at| at.boolean())?;
    let basis = OrthonormalBasis::new(vectors, s_init.dim(), STRUCTURAL_TOL)
        .map_err(|e| Error::schema("/accept_basis", e.to_string()))?;
    Qfa::new(alphabet, s_init, transitions, basis, generalized)
}

fn parse_dfa(obj: &Map<String, Value>) -> Result<Dfa> {
    let states = get(obj, "", "states", parse_names)?;
    let alphabet = get(obj, "", "alphabet", parse_symbols)?;
    let transitions = get(obj, "", "transitions", |at| {
        items(at, |t| {
            let parts = items(t, |s| s.string().map(str::to_string))?;
            match <[String; 3]>::try_from(parts) {
                Ok([f, a, to]) => Ok((f, Symbol::from(a), to)),
                Err(_) => t.fail("expected [from, symbol, to]"),
            }
        })
    })?;
    let init = get(obj, "", "init", |at| at.string().map(str::to_string))?;
    let accepting = get(obj, "", "accepting", parse_names)?;
    Dfa::new(states, alphabet, &transitions, &init, &accepting)
}

fn parse_grammar(obj: &Map<String, Value>) -> Result<QuantumGrammar> {
    let variables = get(obj, "", "variables", parse_names)?;
    let terminals = get(obj, "", "terminals", parse_symbols)?;
    let initial = get(obj, "", "initial", |at| at.string().map(str::to_string))?;
    let dim = get(obj, "", "dimensionality", |at| at.count())?;
    let productions = get(obj, "", "productions", |at| {
        items(at, |p| {
            let o = p.object()?;
            let lhs = get(o, p.path, "lhs", |at| at.string().map(str::to_string))?;
            let rhs = get(o, p.path, "rhs", |at| {
                items(at, |s| {
                    let name = s.string()?;
                    Ok(if terminals.iter().any(|t| t.as_str() == name) {
                        GSymbol::term(name)
                    } else {
                        GSymbol::var(name)
                    })
                })
            })?;
            let amplitudes = get(o, p.path, "amplitudes", |at| {
                let v = parse_vector(at)?;
                if v.dim() != dim {
                    return at.fail(format!("expected {dim} amplitudes, got {}", v.dim()));
                }
                Ok(v)
            })?;
            Ok(Production { lhs, rhs, amplitudes })
        })
    })?;
    QuantumGrammar::new(variables, terminals, initial, dim, productions)
}

fn parse_action(at: At<'_>) -> Result<Action> {
    match at.value {
        Value::String(s) if s == "pop" => Ok(Action::Pop),
        Value::String(s) if s == "stay" => Ok(Action::Stay),
        Value::Object(o) if o.len() == 1 => {
            if let Some(v) = o.get("push") {
                let path = child_path(at.path, "push");
                return At { value: v, path: &path }.string().map(|s| Action::Push(Symbol::from(s)));
            }
            if let Some(v) = o.get("push_word") {
                let path = child_path(at.path, "push_word");
                let inner = At { value: v, path: &path };
                // a bare string is read as single-character symbols
                return match v {
                    Value::String(s) => Ok(Action::PushWord(s.chars().map(Symbol::from).collect())),
                    _ => parse_symbols(inner).map(Action::PushWord),
                };
            }
            at.fail("expected {\"push\": …} or {\"push_word\": …}")
        }
        _ => at.fail("expected \"pop\", \"stay\", {\"push\": …} or {\"push_word\": …}"),
    }
}

fn parse_below(at: At<'_>) -> Result<Below> {
    match at.value {
        Value::String(s) if s == "any" => Ok(Below::Any),
        Value::String(s) if s == "empty" => Ok(Below::Empty),
        Value::Object(o) if o.len() == 1 && o.contains_key("symbol") => {
            let path = child_path(at.path, "symbol");
            At { value: &o["symbol"], path: &path }
                .string()
                .map(|s| Below::Sym(Symbol::from(s)))
        }
        _ => at.fail("expected \"any\", \"empty\" or {\"symbol\": …}"),
    }
}

fn parse_qpda(obj: &Map<String, Value>) -> Result<Qpda> {
    let controls = get(obj, "", "controls", parse_names)?;
    let input_alphabet = get(obj, "", "input_alphabet", parse_symbols)?;
    let stack_alphabet = get(obj, "", "stack_alphabet", |at| {
        let symbols = parse_symbols(at)?;
        if let Some(i) = symbols.iter().position(|s| s.as_str() == DUMMY) {
            return Err(Error::schema(
                format!("{}/{i}", at.path),
                format!("stack symbol `{DUMMY}` is reserved"),
            ));
        }
        Ok(symbols)
    })?;
    let rules = get(obj, "", "rules", |at| {
        items(at, |r| {
            let o = r.object()?;
            let name = |key: &str| get(o, r.path, key, |at| at.string().map(str::to_string));
            let top = get(o, r.path, "top", |at| match at.value {
                Value::Null => Ok(None),
                _ => at.string().map(|s| Some(Symbol::from(s))),
            })?;
            let below = match o.get("below") {
                None => Below::Any,
                Some(v) => {
                    let path = child_path(r.path, "below");
                    parse_below(At { value: v, path: &path })?
                }
            };
            Ok(Rule {
                input: Symbol::from(name("input")?),
                from: name("from")?,
                top,
                action: get(o, r.path, "action", parse_action)?,
                below,
                to: name("to")?,
                amplitude: get(o, r.path, "amplitude", parse_complex)?,
            })
        })
    })?;
    let s_init = get(obj, "", "s_init", |at| {
        items(at, |e| {
            let o = e.object()?;
            Ok(InitEntry {
                control: get(o, e.path, "control", |at| at.string().map(str::to_string))?,
                stack: get(o, e.path, "stack", parse_symbols)?,
                amplitude: get(o, e.path, "amplitude", parse_complex)?,
            })
        })
    })?;
    let accept: BTreeSet<String> = get(obj, "", "accept", parse_names)?.into_iter().collect();
    let acceptance = get(obj, "", "acceptance", |at| match at.string()? {
        "empty_stack_and_control" => Ok(AcceptanceMode::EmptyStackAndControl),
        "control_only" => Ok(AcceptanceMode::ControlOnly),
        _ => at.fail("expected \"empty_stack_and_control\" or \"control_only\""),
    })?;
    let unitary = get(obj, "", "unitary", |at| at.boolean())?;
    let pushes_words = match obj.get("pushes_words") {
        None => rules.iter().any(|r| matches!(r.action, Action::PushWord(_))),
        Some(v) => At { value: v, path: "/pushes_words" }.boolean()?,
    };
    Qpda::new(
        controls,
        input_alphabet,
        stack_alphabet,
        rules,
        s_init,
        accept,
        acceptance,
        unitary,
        pushes_words,
    )
}

fn parse_bilinear(obj: &Map<String, Value>) -> Result<BilinearForm> {
    let kind = get(obj, "", "kind", |at| match at.string()? {
        "complex" => Ok(FormKind::Complex),
        "real" => Ok(FormKind::Real),
        _ => at.fail("expected \"complex\" or \"real\""),
    })?;
    BilinearForm::new(
        get(obj, "", "pi", parse_vector)?,
        get(obj, "", "matrices", parse_matrix_map)?,
        get(obj, "", "eta", parse_vector)?,
        kind,
    )
}

pub fn machine_from_json(value: &Value) -> Result<Machine> {
    let root = At { value, path: "" };
    let obj = root.object()?;
    let kind = get(obj, "", "type", |at| at.string().map(str::to_string))?;
    match kind.as_str() {
        "qfa" => parse_qfa(obj).map(Machine::Qfa),
        "dfa" => parse_dfa(obj).map(Machine::Dfa),
        "grammar" => parse_grammar(obj).map(Machine::Grammar),
        "qpda" => parse_qpda(obj).map(Machine::Qpda),
        "bilinear" => parse_bilinear(obj).map(Machine::Bilinear),
        other => Err(Error::schema("/type", format!("unknown machine type `{other}`"))),
    }
}

pub fn parse_machine(text: &str) -> Result<Machine> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::schema("", format!("malformed JSON: {e}")))?;
    machine_from_json(&value)
}

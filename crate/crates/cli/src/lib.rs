//! The `qlang` command line.
//!
//! [`run`] parses arguments, executes one subcommand and returns the exit
//! code: 0 on success, 1 when the library reports an error, 2 on usage
//! errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use qlang::algebra::{real, Complex};
use qlang::catalog;
use qlang::format::{parse_machine, to_json_string, Machine};
use qlang::grammar::{
    eliminate_unit_productions, f_of_word, qfa_to_regular_grammar, regular_to_qfa,
    symmetric_difference, three_way_interference, to_chomsky, to_greibach,
};
use qlang::qfa::{
    complement, embed_dfa, find_pump, inverse_homomorphism, monoid_is_group, tensor,
    verify_pump, weighted_direct_sum,
};
use qlang::qpda::{
    build_leq_qpda, check_unitarity_truncated, grammar_to_qpda, lemma11_expand,
    qpda_accept_probability, qpda_to_grammar, tensor_with_qfa,
};
use qlang::series::{grammar_amplitude_series, qfa_length_coefficients, quantum_language_coefficients};
use qlang::stochastic::{eval_bilinear, to_bilinear, to_real};
use qlang::word::{words_up_to, Symbol, Word};
use qlang::{Error, Qfa, Qpda, QuantumGrammar};

#[derive(Parser, Debug)]
#[command(name = "qlang", version, about = "Quantum automata, push-down machines and grammars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the acceptance probability of a word.
    Prob {
        file: PathBuf,
        /// The word, one symbol per character unless --sep is given.
        word: String,
        #[arg(long)]
        sep: Option<String>,
    },
    /// Print Σ_{|w|=n} f(w) (or the amplitude series) for n = 0..=max-len.
    Coeffs {
        file: PathBuf,
        #[arg(long)]
        max_len: usize,
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Amplitude coordinate for the fixpoint method.
        #[arg(long, default_value_t = 0)]
        coord: usize,
    },
    /// Find a pumping constant for a word and check it on short contexts.
    Pump {
        file: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        sep: Option<String>,
    },
    /// Convert a machine or grammar and print it as JSON.
    Convert {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
    },
    /// Print structural and unitarity reports.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Combine machines or grammars and print the result as JSON.
    Closure {
        #[arg(long, value_enum)]
        op: ClosureOp,
        files: Vec<PathBuf>,
        /// Real weights `a,b` for the weighted sum.
        #[arg(long)]
        weights: Option<String>,
        /// Homomorphism for invhom, e.g. `a=ab,b=`.
        #[arg(long)]
        map: Option<String>,
    },
    /// Build a bundled example and print its values.
    Demo {
        #[arg(value_enum)]
        name: Demo,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Bilinear,
    Enumerate,
    Fixpoint,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Target {
    Gnf,
    Chomsky,
    Qpda,
    Grammar,
    Bilinear,
    Qfa,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ClosureOp {
    Sum,
    Tensor,
    Complement,
    Invhom,
    Symdiff,
    Threeway,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Demo {
    Fibonacci,
    Measurement,
    Dyck,
    Leq,
    Symdiff,
}

/// Failures, split by exit code.
enum Failure {
    Usage(String),
    Library(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Library(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            2
        }
        Err(Failure::Library(msg)) => {
            let _ = writeln!(err, "error: {}", msg.replace('\n', " "));
            1
        }
    }
}

fn load(path: &PathBuf) -> Result<Machine, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Library(format!("{}: {e}", path.display())))?;
    Ok(parse_machine(&text)?)
}

/// Reads a file as a finite automaton, embedding DFAs.
fn load_qfa(path: &PathBuf) -> Result<Qfa, Failure> {
    match load(path)? {
        Machine::Qfa(q) => Ok(q),
        Machine::Dfa(d) => Ok(embed_dfa(&d)?),
        other => Err(Failure::Usage(format!("expected a qfa or dfa, got a {}", other.kind()))),
    }
}

fn load_grammar(path: &PathBuf) -> Result<QuantumGrammar, Failure> {
    match load(path)? {
        Machine::Grammar(g) => Ok(g),
        other => Err(Failure::Usage(format!("expected a grammar, got a {}", other.kind()))),
    }
}

fn probability(m: &Machine, w: &Word) -> qlang::Result<f64> {
    match m {
        Machine::Qfa(q) => q.accept_probability(w),
        Machine::Dfa(d) => Ok(if d.accepts(w)? { 1.0 } else { 0.0 }),
        Machine::Grammar(g) => f_of_word(g, w),
        Machine::Qpda(p) => qpda_accept_probability(p, w),
        Machine::Bilinear(b) => eval_bilinear(b, w),
    }
}

fn alphabet_of(m: &Machine) -> Vec<Symbol> {
    match m {
        Machine::Qfa(q) => q.alphabet().to_vec(),
        Machine::Dfa(d) => d.alphabet().to_vec(),
        Machine::Grammar(g) => g.terminals().to_vec(),
        Machine::Qpda(p) => p.input_alphabet().to_vec(),
        Machine::Bilinear(b) => b.matrices.keys().cloned().collect(),
    }
}

fn fmt_value(z: Complex) -> String {
    if z.im.abs() > 1e-12 {
        format!("{:.12}{:+.12}i", z.re, z.im)
    } else {
        format!("{:.12}", z.re)
    }
}

fn execute(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Prob { file, word, sep } => {
            let m = load(&file)?;
            let f = probability(&m, &Word::parse(&word, sep.as_deref()))? + 0.0;
            writeln!(out, "{f:.12}")?;
        }
        Command::Coeffs { file, max_len, method, coord } => {
            let m = load(&file)?;
            let method = method.unwrap_or(match m {
                Machine::Qfa(_) | Machine::Dfa(_) => Method::Bilinear,
                Machine::Grammar(_) => Method::Fixpoint,
                _ => Method::Enumerate,
            });
            let series = match (method, &m) {
                (Method::Bilinear, Machine::Qfa(q)) => qfa_length_coefficients(q, max_len),
                (Method::Bilinear, Machine::Dfa(d)) => qfa_length_coefficients(&embed_dfa(d)?, max_len),
                (Method::Fixpoint, Machine::Grammar(g)) => grammar_amplitude_series(g, coord, max_len)?,
                (Method::Enumerate, _) => {
                    quantum_language_coefficients(|w| probability(&m, w), &alphabet_of(&m), max_len)?
                }
                (method, m) => {
                    return Err(Failure::Usage(format!(
                        "method {method:?} does not apply to a {}",
                        m.kind()
                    )))
                }
            };
            for (n, z) in series.coeffs().iter().enumerate() {
                writeln!(out, "{n}\t{}", fmt_value(*z))?;
            }
        }
        Command::Pump { file, word, eps, sep } => {
            let q = load_qfa(&file)?;
            let w = Word::parse(&word, sep.as_deref());
            let k = find_pump(&q, &w, eps)?;
            let contexts = words_up_to(q.alphabet(), 2);
            let samples: Vec<(Word, Word)> = contexts
                .iter()
                .flat_map(|u| contexts.iter().map(move |v| (u.clone(), v.clone())))
                .collect();
            let ok = verify_pump(&q, &w, k, eps, &samples)?;
            writeln!(out, "k = {k}")?;
            writeln!(
                out,
                "verified on {} contexts (|u|, |v| <= 2): {}",
                samples.len(),
                if ok { "ok" } else { "FAILED" }
            )?;
        }
        Command::Convert { file, to } => {
            let converted = convert(load(&file)?, to)?;
            writeln!(out, "{}", to_json_string(&converted))?;
        }
        Command::Check { file, depth } => check(&load(&file)?, depth, out)?,
        Command::Closure { op, files, weights, map } => {
            let m = closure(op, &files, weights.as_deref(), map.as_deref())?;
            writeln!(out, "{}", to_json_string(&m))?;
        }
        Command::Demo { name } => demo(name, out)?,
    }
    Ok(())
}

fn qpda_as_grammar(p: &Qpda) -> qlang::Result<QuantumGrammar> {
    let p = p.clone().into_generalized();
    if p.depends_on_below() {
        qpda_to_grammar(&lemma11_expand(&p)?)
    } else {
        qpda_to_grammar(&p)
    }
}

fn convert(m: Machine, to: Target) -> Result<Machine, Failure> {
    let unsupported = |m: &Machine| {
        Failure::Usage(format!("cannot convert a {} to {to:?}", m.kind()).to_lowercase())
    };
    Ok(match (to, &m) {
        (Target::Gnf, Machine::Grammar(g)) => Machine::Grammar(to_greibach(g)?),
        (Target::Chomsky, Machine::Grammar(g)) => {
            Machine::Grammar(to_chomsky(&eliminate_unit_productions(g)?)?)
        }
        (Target::Qpda, Machine::Grammar(g)) => Machine::Qpda(grammar_to_qpda(&to_greibach(g)?)?),
        (Target::Grammar, Machine::Qpda(p)) => Machine::Grammar(qpda_as_grammar(p)?),
        (Target::Grammar, Machine::Qfa(q)) => Machine::Grammar(qfa_to_regular_grammar(q)?),
        (Target::Grammar, Machine::Dfa(d)) => Machine::Grammar(qfa_to_regular_grammar(&embed_dfa(d)?)?),
        (Target::Bilinear, Machine::Qfa(q)) => Machine::Bilinear(to_bilinear(q)),
        (Target::Bilinear, Machine::Dfa(d)) => Machine::Bilinear(to_bilinear(&embed_dfa(d)?)),
        (Target::Bilinear, Machine::Bilinear(b)) => Machine::Bilinear(to_real(b)?),
        (Target::Qfa, Machine::Grammar(g)) => Machine::Qfa(regular_to_qfa(g)?),
        (Target::Qfa, Machine::Dfa(d)) => Machine::Qfa(embed_dfa(d)?),
        _ => return Err(unsupported(&m)),
    })
}

fn check(m: &Machine, depth: usize, out: &mut dyn Write) -> CmdResult {
    match m {
        Machine::Qfa(q) => {
            writeln!(out, "qfa: dimension {}, {} letters", q.dim(), q.alphabet().len())?;
            writeln!(out, "mode: {}", if q.is_generalized() { "generalized" } else { "unitary" })?;
            writeln!(out, "|s_init|^2 = {:.12}", q.s_init().norm_sqr())?;
            for (a, u) in q.transitions() {
                writeln!(out, "U_{a}: unitarity deviation {:.3e}", u.unitarity_deviation()?)?;
            }
            writeln!(out, "accepting subspace: rank {} (orthonormal)", q.accept_basis().len())?;
        }
        Machine::Dfa(d) => {
            writeln!(out, "dfa: {} states, {} letters", d.states().len(), d.alphabet().len())?;
            writeln!(out, "minimal states: {}", d.minimize().states().len())?;
            writeln!(out, "transition monoid is a group: {}", monoid_is_group(d))?;
        }
        Machine::Grammar(g) => {
            let forms: Vec<String> = g.forms().iter().map(|f| f.to_string()).collect();
            writeln!(
                out,
                "grammar: {} variables, {} terminals, {} productions, dimensionality {}",
                g.variables().len(),
                g.terminals().len(),
                g.productions().len(),
                g.dimensionality()
            )?;
            writeln!(out, "forms: {}", forms.join(", "))?;
            let eps = qlang::grammar::check_epsilon_restriction(g);
            writeln!(
                out,
                "epsilon restriction: {}",
                match eps {
                    Ok(()) => "ok".to_string(),
                    Err(e) => format!("violated ({e})"),
                }
            )?;
        }
        Machine::Qpda(p) => {
            writeln!(
                out,
                "qpda: {} controls, {} stack symbols, {} rules",
                p.controls().len(),
                p.stack_alphabet().len(),
                p.rules().len()
            )?;
            writeln!(out, "mode: {}", if p.unitary_claimed() { "unitary" } else { "generalized" })?;
            let r = check_unitarity_truncated(p, depth)?;
            writeln!(out, "interior unitary at depth {depth}: {}", r.interior_unitary)?;
            writeln!(out, "max deviation: {:.3e}", r.max_deviation)?;
        }
        Machine::Bilinear(b) => {
            writeln!(out, "bilinear form: {:?}, dimension {}, {} letters", b.kind, b.dim, b.matrices.len())?;
        }
    }
    Ok(())
}

fn parse_weights(s: &str) -> Result<(f64, f64), Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Failure::Usage(format!("weights must look like `a,b`, got `{s}`"));
    match parts.as_slice() {
        [a, b] => Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn parse_map(s: &str) -> Result<BTreeMap<Symbol, Word>, Failure> {
    s.split(',')
        .map(|entry| {
            let (k, v) = entry
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("bad homomorphism entry `{entry}`")))?;
            Ok((Symbol::from(k.trim()), Word::from_chars(v.trim())))
        })
        .collect()
}

fn closure(op: ClosureOp, files: &[PathBuf], weights: Option<&str>, map: Option<&str>) -> Result<Machine, Failure> {
    let want = |n: usize| {
        if files.len() == n {
            Ok(())
        } else {
            Err(Failure::Usage(format!("{op:?} takes {n} file(s), got {}", files.len()).to_lowercase()))
        }
    };
    Ok(match op {
        ClosureOp::Sum => {
            want(2)?;
            let (a, b) = match weights {
                Some(s) => parse_weights(s)?,
                None => (0.5f64.sqrt(), 0.5f64.sqrt()),
            };
            Machine::Qfa(weighted_direct_sum(&load_qfa(&files[0])?, &load_qfa(&files[1])?, real(a), real(b))?)
        }
        ClosureOp::Tensor => {
            want(2)?;
            match load(&files[0])? {
                Machine::Qpda(p) => Machine::Qpda(tensor_with_qfa(&p, &load_qfa(&files[1])?)?),
                _ => Machine::Qfa(tensor(&load_qfa(&files[0])?, &load_qfa(&files[1])?)?),
            }
        }
        ClosureOp::Complement => {
            want(1)?;
            Machine::Qfa(complement(&load_qfa(&files[0])?)?)
        }
        ClosureOp::Invhom => {
            want(1)?;
            let h = parse_map(map.ok_or_else(|| Failure::Usage("invhom needs --map".into()))?)?;
            Machine::Qfa(inverse_homomorphism(&load_qfa(&files[0])?, &h)?)
        }
        ClosureOp::Symdiff => {
            want(2)?;
            Machine::Grammar(symmetric_difference(&load_grammar(&files[0])?, &load_grammar(&files[1])?)?)
        }
        ClosureOp::Threeway => {
            want(3)?;
            Machine::Grammar(three_way_interference(
                &load_grammar(&files[0])?,
                &load_grammar(&files[1])?,
                &load_grammar(&files[2])?,
            )?)
        }
    })
}

fn integers(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| format!("{}", v.round() as i64))
        .collect::<Vec<_>>()
        .join(" ")
}

fn demo(name: Demo, out: &mut dyn Write) -> CmdResult {
    match name {
        Demo::Fibonacci => {
            let q = embed_dfa(&catalog::bb_forbidden_dfa())?;
            writeln!(out, "{}", integers(qfa_length_coefficients(&q, 5).real_coeffs()))?;
        }
        Demo::Measurement => {
            let w = Word::empty();
            let p0 = catalog::measurement_qfa(0)?.accept_probability(&w)?;
            let p1 = catalog::measurement_qfa(1)?.accept_probability(&w)?;
            writeln!(out, "{p0:.12} {p1:.12}")?;
        }
        Demo::Dyck => {
            let s = grammar_amplitude_series(&catalog::dyck_grammar(), 0, 8)?;
            writeln!(out, "{}", integers(s.real_coeffs().into_iter().step_by(2)))?;
        }
        Demo::Leq => {
            let p = build_leq_qpda();
            let s = quantum_language_coefficients(|w| qpda_accept_probability(&p, w), p.input_alphabet(), 8)?;
            writeln!(out, "{}", integers(s.real_coeffs().into_iter().step_by(2)))?;
        }
        Demo::Symdiff => {
            let g = symmetric_difference(&catalog::equal_ab_grammar(), &catalog::equal_bc_grammar())?;
            for w in ["", "ab", "bc", "abc", "aabbc", "abbcc", "aabbcc", "ba"] {
                let f = f_of_word(&g, &Word::from_chars(w))?;
                let shown = if w.is_empty() { "ε" } else { w };
                writeln!(out, "{shown}\t{f:.12}")?;
            }
        }
    }
    Ok(())
}

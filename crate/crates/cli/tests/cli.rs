use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qlang::algebra::{c, ComplexMatrix, ComplexVector, OrthonormalBasis};
use qlang::catalog;
use qlang::format::{parse_machine, to_json_string, Machine};
use qlang::qpda::build_leq_qpda;
use qlang::word::alphabet;
use qlang::Qfa;
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("qlang").chain(args.iter().copied());
    let code = qlang_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, m: &Machine) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, to_json_string(m)).unwrap();
    path
}

fn rotation(theta: f64) -> Qfa {
    let (s, co) = theta.sin_cos();
    let u = ComplexMatrix::from_rows(vec![vec![c(co, 0.0), c(s, 0.0)], vec![c(-s, 0.0), c(co, 0.0)]]).unwrap();
    Qfa::new(
        alphabet(&["a"]),
        ComplexVector::basis(2, 0),
        BTreeMap::from([(qlang::Symbol::from("a"), u)]),
        OrthonormalBasis::standard(2, &[0]).unwrap(),
        false,
    )
    .unwrap()
}

#[test]
fn demos_print_golden_values() {
    let cases = [
        ("fibonacci", "1 2 3 5 8 13\n"),
        ("measurement", "0.750000000000 0.250000000000\n"),
        ("dyck", "1 1 2 5 14\n"),
        ("leq", "1 2 6 20 70\n"),
    ];
    for (name, expected) in cases {
        let (code, out, _) = run(&["demo", name]);
        assert_eq!(code, 0);
        assert_eq!(out, expected, "{name}");
    }
    let (code, out, _) = run(&["demo", "symdiff"]);
    assert_eq!(code, 0);
    assert!(out.contains("ab\t1.000000000000") && out.contains("abc\t0.000000000000"), "{out}");
}

#[test]
fn probability_of_leq_words() {
    let dir = TempDir::new().unwrap();
    let leq = write(dir.path(), "leq.json", &Machine::Qpda(build_leq_qpda()));
    let leq = leq.to_str().unwrap();
    assert_eq!(run(&["prob", leq, "ab"]), (0, "1.000000000000\n".into(), String::new()));
    assert_eq!(run(&["prob", leq, "aab"]).1, "0.000000000000\n");
    assert_eq!(run(&["prob", leq, ""]).1, "1.000000000000\n");
    assert_eq!(run(&["prob", leq, "a b", "--sep", " "]).1, "1.000000000000\n");
    // repeated runs are identical
    let first = run(&["prob", leq, "abba"]);
    for _ in 0..3 {
        assert_eq!(run(&["prob", leq, "abba"]), first);
    }
}

#[test]
fn coefficient_methods() {
    let dir = TempDir::new().unwrap();
    let dfa = write(dir.path(), "bb.json", &Machine::Dfa(catalog::bb_forbidden_dfa()));
    let dfa = dfa.to_str().unwrap();
    let (code, out, _) = run(&["coeffs", dfa, "--max-len", "4"]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "0\t1.000000000000\n1\t2.000000000000\n2\t3.000000000000\n3\t5.000000000000\n4\t8.000000000000\n"
    );
    let (_, enumerated, _) = run(&["coeffs", dfa, "--max-len", "4", "--method", "enumerate"]);
    assert_eq!(enumerated, out);

    let dyck = write(dir.path(), "dyck.json", &Machine::Grammar(catalog::dyck_grammar()));
    let (code, out, _) = run(&["coeffs", dyck.to_str().unwrap(), "--max-len", "4"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().nth(4), Some("4\t2.000000000000"));

    let (code, _, err) = run(&["coeffs", dyck.to_str().unwrap(), "--max-len", "4", "--method", "bilinear"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn pumping_rational_rotation() {
    let dir = TempDir::new().unwrap();
    let q = write(dir.path(), "rot.json", &Machine::Qfa(rotation(2.0 * std::f64::consts::PI * 0.3)));
    let (code, out, err) = run(&["pump", q.to_str().unwrap(), "--word", "a", "--eps", "0.05"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("k = 10\n"), "{out}");
    assert!(out.contains(": ok"), "{out}");
}

#[test]
fn conversions_reparse() {
    let dir = TempDir::new().unwrap();
    let files = [
        ("dyck.json", Machine::Grammar(catalog::dyck_grammar_separated()), vec!["gnf", "chomsky", "qpda"]),
        ("leq.json", Machine::Qpda(build_leq_qpda()), vec!["grammar"]),
        ("bb.json", Machine::Dfa(catalog::bb_forbidden_dfa()), vec!["qfa", "bilinear", "grammar"]),
        ("m.json", Machine::Qfa(catalog::measurement_qfa(0).unwrap()), vec!["bilinear", "grammar"]),
    ];
    for (name, m, targets) in files {
        let path = write(dir.path(), name, &m);
        for to in targets {
            let (code, out, err) = run(&["convert", path.to_str().unwrap(), "--to", to]);
            assert_eq!(code, 0, "{name} -> {to}: {err}");
            let back = parse_machine(&out).unwrap();
            let again = write(dir.path(), &format!("{to}-{name}"), &back);
            let (code, _, err) = run(&["check", again.to_str().unwrap(), "--depth", "2"]);
            assert_eq!(code, 0, "{name} -> {to}: {err}");
        }
    }
    let bb = dir.path().join("bb.json");
    let (code, _, err) = run(&["convert", bb.to_str().unwrap(), "--to", "gnf"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn grammar_from_leq_machine_agrees() {
    let dir = TempDir::new().unwrap();
    let leq = write(dir.path(), "leq.json", &Machine::Qpda(build_leq_qpda()));
    let (_, out, _) = run(&["convert", leq.to_str().unwrap(), "--to", "grammar"]);
    let g = write(dir.path(), "g.json", &parse_machine(&out).unwrap());
    for w in ["", "ab", "ba", "aabb", "abb", "bbaa"] {
        assert_eq!(run(&["prob", g.to_str().unwrap(), w]).1, run(&["prob", leq.to_str().unwrap(), w]).1, "{w}");
    }
}

#[test]
fn unitarity_report() {
    let dir = TempDir::new().unwrap();
    let leq = write(dir.path(), "leq.json", &Machine::Qpda(build_leq_qpda()));
    let (code, out, _) = run(&["check", leq.to_str().unwrap(), "--depth", "6"]);
    assert_eq!(code, 0);
    assert!(out.contains("interior unitary at depth 6: true"), "{out}");
    let bb = write(dir.path(), "bb.json", &Machine::Dfa(catalog::bb_forbidden_dfa()));
    let (_, out, _) = run(&["check", bb.to_str().unwrap()]);
    assert!(out.contains("group: false"), "{out}");
}

#[test]
fn closures() {
    let dir = TempDir::new().unwrap();
    let l1 = write(dir.path(), "l1.json", &Machine::Grammar(catalog::equal_ab_grammar()));
    let l2 = write(dir.path(), "l2.json", &Machine::Grammar(catalog::equal_bc_grammar()));
    let (code, out, err) = run(&["closure", "--op", "symdiff", l1.to_str().unwrap(), l2.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let sd = write(dir.path(), "sd.json", &parse_machine(&out).unwrap());
    assert_eq!(run(&["prob", sd.to_str().unwrap(), "aabbc"]).1, "1.000000000000\n");
    assert_eq!(run(&["prob", sd.to_str().unwrap(), "abc"]).1, "0.000000000000\n");

    let [t1, t2, t3] = catalog::designed_triple();
    let paths: Vec<PathBuf> = [t1, t2, t3]
        .into_iter()
        .enumerate()
        .map(|(i, g)| write(dir.path(), &format!("t{i}.json"), &Machine::Grammar(g)))
        .collect();
    let args: Vec<&str> = paths.iter().map(|p| p.to_str().unwrap()).collect();
    let (code, out, err) = run(&["closure", "--op", "threeway", args[0], args[1], args[2]]);
    assert_eq!(code, 0, "{err}");
    let tw = write(dir.path(), "tw.json", &parse_machine(&out).unwrap());
    let tw = tw.to_str().unwrap();
    assert_eq!(run(&["prob", tw, "ab"]).1, "0.000000000000\n");
    assert_eq!(run(&["prob", tw, "a"]).1, "1.000000000000\n");
    assert_eq!(run(&["prob", tw, "b"]).1, "1.000000000000\n");
    assert_eq!(run(&["prob", tw, "ba"]).1, "0.000000000000\n");

    let m0 = write(dir.path(), "m0.json", &Machine::Qfa(catalog::measurement_qfa(0).unwrap()));
    let m0 = m0.to_str().unwrap();
    let (_, out, _) = run(&["closure", "--op", "complement", m0]);
    let comp = write(dir.path(), "comp.json", &parse_machine(&out).unwrap());
    assert_eq!(run(&["prob", comp.to_str().unwrap(), "ab"]).1, "0.250000000000\n");
    let (_, out, _) = run(&["closure", "--op", "tensor", m0, m0]);
    let sq = write(dir.path(), "sq.json", &parse_machine(&out).unwrap());
    assert_eq!(run(&["prob", sq.to_str().unwrap(), "ab"]).1, "0.562500000000\n");
    let (code, out, _) = run(&["closure", "--op", "invhom", "--map", "c=ab,d=", m0]);
    assert_eq!(code, 0);
    let inv = write(dir.path(), "inv.json", &parse_machine(&out).unwrap());
    assert_eq!(run(&["prob", inv.to_str().unwrap(), "cd"]).1, "0.750000000000\n");
    let (code, _, _) = run(&["closure", "--op", "sum", m0]);
    assert_eq!(code, 2);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    let (code, _, err) = run(&["prob", missing.to_str().unwrap(), "a"]);
    assert_eq!(code, 1);
    assert_eq!(err.lines().count(), 1);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"type":"qfa","alphabet":["a"]}"#).unwrap();
    let (code, _, err) = run(&["prob", bad.to_str().unwrap(), "a"]);
    assert_eq!(code, 1);
    assert!(err.contains("/s_init"), "{err}");
    assert_eq!(err.lines().count(), 1);

    let leq = write(dir.path(), "leq.json", &Machine::Qpda(build_leq_qpda()));
    let (code, _, err) = run(&["prob", leq.to_str().unwrap(), "abc"]);
    assert_eq!(code, 1, "{err}");

    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["coeffs", leq.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

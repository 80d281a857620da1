use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn eqthink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqthink"))
        .args(args)
        .current_dir(root())
        .env_remove("EQTHINK_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn test_reports_passing_properties() {
    let o = eqthink(&["test", "corpus/defs/append.lx", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4 properties passed"), "{}", stdout(&o));
}

#[test]
fn failing_property_exits_one() {
    let o = eqthink(&["test", "corpus/defs/prefix.lx", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL app-pfx-objects: counterexample"));
}

#[test]
fn prove_accepts_absorption() {
    let o = eqthink(&["prove", "corpus/proofs/absorption.lx"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("and-absorption: Accepted"));
}

#[test]
fn check_prints_witness_for_negatives() {
    for f in ["inconsistent", "incomprehensive", "nonconstructive"] {
        let o = eqthink(&["check", &format!("corpus/negative/{f}.lx")]);
        assert_eq!(o.status.code(), Some(1), "{f}");
        assert!(stdout(&o).contains("witness:"), "{f}: {}", stdout(&o));
    }
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(eqthink(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(eqthink(&["prove", "no/such/file.lx"]).status.code(), Some(2));
    assert_eq!(eqthink(&["eval", "-e", "(cons 1"]).status.code(), Some(2));
    assert_eq!(eqthink(&["circuit", "build", "(+ x y)"]).status.code(), Some(2));
}

#[test]
fn json_report_has_schema_and_seed_from_env() {
    let o = Command::new(env!("CARGO_BIN_EXE_eqthink"))
        .args(["test", "corpus/defs/append.lx", "--json"])
        .current_dir(root())
        .env("EQTHINK_SEED", "41")
        .output()
        .unwrap();
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["schema"], 1);
    assert_eq!(j["seed"], 41);
    assert_eq!(j["exit_code"], 0);
    assert_eq!(j["items"].as_array().unwrap().len(), 4);
}

#[test]
fn eval_uses_loaded_definitions() {
    let o = eqthink(&["eval", "corpus/defs/sorting.lx", "-e", "(merge-sort '(3 1 2))"]);
    assert_eq!(stdout(&o).trim(), "(1 2 3)");
}

#[test]
fn steps_emits_csv_and_verdict() {
    let o = eqthink(&["steps", "insertion-sort", "--sizes", "16,32,64,128", "--worst-case", "--candidate", "n2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("size,steps,candidate,c"));
    assert_eq!(out.lines().filter(|l| l.ends_with(|c: char| c.is_ascii_digit()) && l.contains(",n2,")).count(), 4);
    assert!(out.contains("verdict n2: consistent"));
    let o = eqthink(&["steps", "insertion-sort", "--sizes", "16,32,64,128", "--worst-case", "--candidate", "n"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn circuit_commands() {
    let o = eqthink(&["circuit", "equiv", "(and (or x y) y)", "y"]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(0), "Equivalent"));
    let o = eqthink(&["circuit", "equiv", "(implies x y)", "(or x y)"]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(1), "Differ at x = 0, y = 0"));
    let o = eqthink(&["circuit", "adder", "4", "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    let o = eqthink(&["circuit", "basis", "(xor a b)", "--to", "impl", "--json"]);
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["items"][0]["detail"]["equivalent"], true);

    let dir = std::env::temp_dir().join(format!("eqthink-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let net = dir.join("half.json");
    let o = eqthink(&["circuit", "build", "(xor a b)"]);
    std::fs::write(&net, &o.stdout).unwrap();
    let o = eqthink(&["circuit", "sim", net.to_str().unwrap(), "a=1", "b=0"]);
    assert_eq!(stdout(&o).trim(), "out = 1");
    let o = eqthink(&["circuit", "equiv", net.to_str().unwrap(), "(or (and a (not b)) (and (not a) b))"]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn mapreduce_jobs() {
    let dir = std::env::temp_dir().join(format!("eqthink-mr-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let docs = dir.join("docs.json");
    std::fs::write(&docs, r#"[[1, ["to", "be", "or", "not", "to", "be"]], [2, ["be", "quick"]]]"#).unwrap();
    let o = eqthink(&["mr", "wordcount", docs.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), r#"[["be",3],["not",1],["or",1],["quick",1],["to",2]]"#);
    let o = eqthink(&["mr", "grep", docs.to_str().unwrap(), "--pattern", "quick"]);
    assert_eq!(stdout(&o).trim(), r#"[[2,["be","quick"]]]"#);

    let graph = dir.join("graph.json");
    std::fs::write(&graph, r#"[["a", ["b"]], ["b", ["a"]]]"#).unwrap();
    let o = eqthink(&["mr", "invert-links", graph.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), r#"[["a",["b"]],["b",["a"]]]"#);
    let o = eqthink(&["mr", "pagerank", graph.to_str().unwrap(), "--iterations", "5"]);
    assert_eq!(stdout(&o).trim(), r#"[["a",{"approx":0.5,"exact":"1/2"}],["b",{"approx":0.5,"exact":"1/2"}]]"#);
    let o = eqthink(&["mr", "pagerank", graph.to_str().unwrap(), "--damping", "1"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn ci_matches_goldens() {
    let o = eqthink(&["ci", "corpus"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("15 files, 0 mismatched"));
}

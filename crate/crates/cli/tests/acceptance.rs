//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use eqthink::admissibility::Verdict;
use eqthink::circuits::{
    big_add, big_mul, formula_to_circuit, from_bits, ripple_carry, simulate, to_basis, to_bits, Basis, Bits,
};
use eqthink::cost::{check_bound, measure_steps, BoundVerdict, Growth, InputKind};
use eqthink::eval::{eval, Value};
use eqthink::mapreduce::{invert_links, job_wordcount, jobs_env, pagerank_rounds, parse_damping};
use eqthink::prover::{check_proof, derive_truth_table, ProofOutcome};
use eqthink::syntax::{parse_program_named, parse_term, Method, ProofScript, Scheme, Term, TopFormKind};
use eqthink::testing::{run_trials, SplitMix64, TestOutcome};
use eqthink::workbench::{Item, Workbench};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

const SEED: u64 = 7;

/// Tolerances and limits.
const ABSORPTION_LIMIT: Duration = Duration::from_secs(1);
const ADDER_LIMIT: Duration = Duration::from_secs(10);
const BIGNUM_LIMIT: Duration = Duration::from_secs(30);
const BOUND_WINDOW: f64 = 1.5;
const DOUBLING: (f64, f64) = (3.6, 4.4);
const RANK_TOLERANCE: f64 = 1e-6;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load(rel: &str) -> Workbench {
    let mut w = Workbench::new();
    w.load_file(&corpus().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"));
    w
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn proof_in(rel: &str, name: &str) -> ProofScript {
    let text = std::fs::read_to_string(corpus().join(rel)).unwrap();
    parse_program_named(&text, rel)
        .unwrap()
        .into_iter()
        .find_map(|f| match f.kind {
            TopFormKind::Proof(p) if p.name == name => Some(p),
            _ => None,
        })
        .unwrap_or_else(|| panic!("no proof {name} in {rel}"))
}

fn outcome_of(w: &Workbench, name: &str) -> Option<ProofOutcome> {
    w.items.iter().find_map(|i| match i {
        Item::Proof { name: n, outcome, .. } if n == name => Some(outcome.clone()),
        _ => None,
    })
}

fn c1_absorption() -> Check {
    let start = Instant::now();
    let w = load("proofs/absorption.lx");
    let elapsed = start.elapsed();
    ensure(outcome_of(&w, "and-absorption") == Some(ProofOutcome::Accepted), || "absorption proof rejected".into())?;
    ensure(elapsed < ABSORPTION_LIMIT, || format!("took {elapsed:?}"))?;

    // The lemmas it relies on, without the absorption proof itself.
    let base = load("proofs/boolean-lemmas.lx");
    let script = proof_in("proofs/absorption.lx", "and-absorption");
    ensure(check_proof(&script, &base.db, &base.env).accepted(), || "verbatim chain rejected".into())?;
    let steps = &script.cases[0].steps;
    ensure(steps.len() == 5, || format!("expected five steps, found {}", steps.len()))?;
    let labels: BTreeSet<String> = base.db.labels().into_iter().collect();
    let mut mutants = 0;
    for i in 0..steps.len() {
        let mut terms = vec![Term::Var("mutant".into()), parse_term("(and x y)").unwrap()];
        terms.extend(steps.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, s)| s.term.clone()));
        for t in terms.into_iter().filter(|t| *t != steps[i].term) {
            let mut m = script.clone();
            m.cases[0].steps[i].term = t.clone();
            let got = check_proof(&m, &base.db, &base.env);
            let want = matches!(&got, ProofOutcome::RejectedAt { case, step, .. } if case == "chain" && *step == i + 1);
            ensure(want, || format!("step {} term {t}: {got:?}", i + 1))?;
            mutants += 1;
        }
        for l in labels.iter().filter(|l| **l != steps[i].label) {
            let mut m = script.clone();
            m.cases[0].steps[i].label = l.clone();
            let got = check_proof(&m, &base.db, &base.env);
            let want = matches!(&got, ProofOutcome::RejectedAt { case, step, .. } if case == "chain" && *step == i + 1);
            ensure(want, || format!("step {} label {l}: {got:?}", i + 1))?;
            mutants += 1;
        }
    }
    Ok(format!("accepted in {elapsed:?}; {mutants} single-step mutants rejected at the mutated step"))
}

/// Random true list of small integers, drawn independently of the property tester.
fn random_list(rng: &mut SplitMix64) -> Vec<i64> {
    let n = rng.below(12);
    (0..n).map(|_| rng.below(201) as i64 - 100).collect()
}

fn to_value(xs: &[i64]) -> Value {
    Value::list(xs.iter().map(|&x| Value::from(x)))
}

fn c2_app_assoc() -> Check {
    let w = load("proofs/app-assoc.lx");
    ensure(outcome_of(&w, "app-assoc") == Some(ProofOutcome::Accepted), || "app-assoc rejected".into())?;
    let script = proof_in("proofs/app-assoc.lx", "app-assoc");
    let base = &script.cases[0];
    ensure(base.steps.len() == 2 && base.steps.iter().all(|s| s.label == "app0"), || {
        "base chain is not two app0 steps".into()
    })?;
    ensure(script.cases[1].steps.len() + 1 == 7, || "inductive chain is not seven lines".into())?;

    let lemma = parse_term("(equal (append xs (append ys zs)) (append (append xs ys) zs))").unwrap();
    let mut rng = SplitMix64::new(SEED);
    for i in 0..1000 {
        let (a, b, c) = (random_list(&mut rng), random_list(&mut rng), random_list(&mut rng));
        let env: BTreeMap<String, Value> =
            [("xs", &a), ("ys", &b), ("zs", &c)].into_iter().map(|(k, v)| (k.to_string(), to_value(v))).collect();
        let holds = eval(&lemma, &env, &w.env).map_err(|e| e.to_string())?.is_true();
        let lhs = eval(&parse_term("(append xs (append ys zs))").unwrap(), &env, &w.env).map_err(|e| e.to_string())?;
        let native: Vec<i64> = a.iter().chain(&b).chain(&c).copied().collect();
        ensure(holds && lhs == to_value(&native), || format!("triple {i} fails: {a:?} {b:?} {c:?}"))?;
    }
    Ok("base and step chains accepted; lemma holds on 1000 random triples".into())
}

fn c3_app_pfx() -> Check {
    let w = load("defs/prefix.lx");
    let run = |name: &str| run_trials(w.property(name).unwrap(), SEED, 100, &w.env).map_err(|e| e.to_string());
    let lists = run("app-pfx")?;
    ensure(lists == TestOutcome::Pass { trials: 100, vacuous: 0 }, || format!("list generators: {lists:?}"))?;
    let objects = run("app-pfx-objects")?;
    let TestOutcome::Counterexample { bindings, .. } = &objects else {
        return Err("object generators found no counterexample".into());
    };
    let guarded = run("app-pfx-guarded")?;
    ensure(guarded.passed(), || format!("guarded: {guarded:?}"))?;

    let p = load("proofs/app-pfx.lx");
    ensure(outcome_of(&p, "app-pfx") == Some(ProofOutcome::Accepted), || "guarded proof rejected".into())?;
    let script = proof_in("proofs/app-pfx.lx", "app-pfx");
    ensure(matches!(script.method, Method::Induction { scheme: Scheme::List, .. }), || "not list induction".into())?;
    ensure(!script.goal.hyps.is_empty(), || "proof goal is unguarded".into())?;
    let xs = &bindings["xs"];
    Ok(format!("lists pass 100 trials; objects fail at xs = {xs}; guarded passes and is proved by list induction"))
}

fn c4_three_cs() -> Check {
    let mut admitted = Vec::new();
    for (file, name, tested_only) in [
        ("defs/append.lx", "append", false),
        ("defs/prefix.lx", "prefix", false),
        ("defs/sorting.lx", "merge", false),
        ("defs/sorting.lx", "merge-sort", true),
        ("defs/sorting.lx", "insertion-sort", false),
        ("defs/avl.lx", "avl-insert", false),
    ] {
        let w = load(file);
        let report = w
            .items
            .iter()
            .find_map(|i| match i {
                Item::Definition { report, .. } if report.name == name => Some(report),
                _ => None,
            })
            .ok_or_else(|| format!("{name} missing"))?;
        ensure(report.admitted(), || format!("{name} rejected: {:?}", report.diagnostics))?;
        if tested_only {
            ensure(report.constructive == Verdict::TestedOnly, || {
                format!("{name} constructive {:?}", report.constructive)
            })?;
        }
        admitted.push(name);
    }
    for (file, failing) in [
        ("negative/inconsistent.lx", "consistent"),
        ("negative/incomprehensive.lx", "comprehensive"),
        ("negative/nonconstructive.lx", "constructive"),
    ] {
        let w = load(file);
        let Some(Item::Definition { report, .. }) = w.items.first() else {
            return Err(format!("{file}: no definition"));
        };
        ensure(!report.admitted(), || format!("{file} admitted"))?;
        let d = report.diagnostics.iter().find(|d| d.check == failing);
        ensure(d.is_some_and(|d| d.witness.is_some()), || format!("{file}: no {failing} witness"))?;
    }
    Ok(format!("{} admitted; three negatives rejected with witnesses", admitted.join(", ")))
}

/// Outputs of a netlist as a number, first output least significant.
fn adder_value(outs: &[bool]) -> u64 {
    outs.iter().enumerate().map(|(i, &b)| (b as u64) << i).sum()
}

const BASIS_FORMULAS: [&str; 20] = [
    "x",
    "(not x)",
    "(and x y)",
    "(or x y)",
    "(implies x y)",
    "(xor x y)",
    "(nand x y)",
    "(nor x y)",
    "(and (or x y) y)",
    "(or (and a b) (and (not a) c))",
    "(xor a (xor b c))",
    "(or (and a b) (and c (xor a b)))",
    "(implies (and p q) (or r (not p)))",
    "(nand (nor a b) (xor c d))",
    "(and (or a b) (and (or c d) (not (and a d))))",
    "(xor (and a b) (or c (and d e)))",
    "(implies (implies a b) (implies (not b) (not a)))",
    "(or (and a (not b)) (and (not c) (xor d e)))",
    "(and (xor a b) (and (xor c (nand d e)) (or f a)))",
    "(nor (and a (and b c)) (implies d (xor e f)))",
];

fn assignment(vars: &[String], i: u64) -> BTreeMap<String, bool> {
    let k = vars.len();
    vars.iter().enumerate().map(|(j, v)| (v.clone(), (i >> (k - 1 - j)) & 1 == 1)).collect()
}

fn c5_circuits() -> Check {
    let start = Instant::now();
    for n in 1..=8usize {
        let c = ripple_carry(n).map_err(|e| e.to_string())?;
        for x in 0..1u64 << n {
            for y in 0..1u64 << n {
                for cin in [false, true] {
                    let mut a = BTreeMap::new();
                    for i in 0..n {
                        a.insert(format!("x{i}"), (x >> i) & 1 == 1);
                        a.insert(format!("y{i}"), (y >> i) & 1 == 1);
                    }
                    a.insert("cin".to_string(), cin);
                    let got = adder_value(&simulate(&c, &a).map_err(|e| e.to_string())?);
                    ensure(got == x + y + cin as u64, || format!("n={n}: {x}+{y}+{cin} gave {got}"))?;
                }
            }
        }
    }
    let adder_time = start.elapsed();
    ensure(adder_time < ADDER_LIMIT, || format!("adders took {adder_time:?}"))?;

    let env = eqthink::eval::DefEnv::new();
    for f in BASIS_FORMULAS {
        let t = parse_term(f).unwrap();
        let c = formula_to_circuit(&t).map_err(|e| e.to_string())?;
        ensure(c.inputs.len() <= 6, || format!("{f} has too many variables"))?;
        for basis in [Basis::Nand, Basis::Impl] {
            let m = to_basis(&c, basis);
            ensure(m.gates.iter().all(|g| basis.allows(g.kind)), || format!("{f}: {basis:?} has foreign gates"))?;
            for i in 0..1u64 << c.inputs.len() {
                let a = assignment(&c.inputs, i);
                let vals = a.iter().map(|(k, &v)| (k.clone(), Value::bool(v))).collect();
                let want = eval(&t, &vals, &env).map_err(|e| e.to_string())?.is_true();
                let got = simulate(&m, &a).map_err(|e| e.to_string())?[0];
                ensure(got == want, || format!("{f} in {basis:?} differs at {a:?}"))?;
            }
        }
    }

    let w = load("proofs/truth-implication.lx");
    let impl_rows = ["impl-tt", "impl-tf", "impl-ft", "impl-ff"];
    ensure(impl_rows.iter().all(|n| outcome_of(&w, n) == Some(ProofOutcome::Accepted)), || {
        "row proofs rejected".into()
    })?;
    let table = derive_truth_table(&parse_term("(implies x y)").unwrap(), &w.env).map_err(|e| e.to_string())?;
    let expected = vec![
        (vec![true, true], true),
        (vec![true, false], false),
        (vec![false, true], true),
        (vec![false, false], true),
    ];
    ensure(table.rows == expected, || format!("derived table {:?}", table.rows))?;
    let c = formula_to_circuit(&parse_term("(implies x y)").unwrap()).map_err(|e| e.to_string())?;
    for (row, out) in &table.rows {
        let a = [("x".to_string(), row[0]), ("y".to_string(), row[1])].into();
        ensure(simulate(&c, &a).map_err(|e| e.to_string())?[0] == *out, || format!("circuit row {row:?}"))?;
    }
    Ok(format!("adders n=1..8 exhaustive in {adder_time:?}; 20 formulas equal in both bases; x->y table matches"))
}

fn c6_bignum() -> Check {
    let start = Instant::now();
    let check = |a: &BigUint, b: &BigUint| -> Result<(), String> {
        let (x, y) = (to_bits(a), to_bits(b));
        let s = big_add(&x, &y).map_err(|e| e.to_string())?;
        let p = big_mul(&x, &y).map_err(|e| e.to_string())?;
        ensure(s.is_canonical() && p.is_canonical(), || format!("non-canonical result for {a}, {b}"))?;
        ensure(from_bits(&s) == a + b, || format!("{a} + {b}"))?;
        ensure(from_bits(&p) == a * b, || format!("{a} * {b}"))
    };
    for a in 0..=255u32 {
        for b in 0..=255u32 {
            check(&BigUint::from(a), &BigUint::from(b))?;
        }
    }
    let mut rng = SplitMix64::new(SEED);
    let big = |rng: &mut SplitMix64| BigUint::from_slice(&(0..8).map(|_| rng.next_u64() as u32).collect::<Vec<_>>());
    let wide = |rng: &mut SplitMix64| {
        let lo = big(rng);
        let hi = big(rng);
        (hi << 128u32) | lo
    };
    for _ in 0..1000 {
        let (a, b) = (wide(&mut rng), wide(&mut rng));
        check(&a, &b)?;
    }
    ensure(to_bits(&BigUint::zero()) == Bits(vec![0]), || "zero is not [0]".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < BIGNUM_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("65536 byte pairs and 1000 random 256-bit pairs agree in {elapsed:?}"))
}

fn c7_complexity() -> Check {
    let w = load("defs/sorting.lx");
    let sizes: Vec<usize> = (4..=12).map(|k| 1 << k).collect();
    let steps = |op: &str, kind: InputKind| -> Result<Vec<(usize, u64)>, String> {
        let m = measure_steps(&w.env, op, kind, &sizes, SEED).map_err(|e| e.to_string())?;
        Ok(m.into_iter().map(|(n, c)| (n, c.total)).collect())
    };
    let bound =
        |m: &[(usize, u64)], g: Growth| check_bound(m, "", |n| g.eval(n), BOUND_WINDOW).map_err(|e| e.to_string());

    let ms = steps("merge-sort", InputKind::Random)?;
    let ms_nlogn = bound(&ms, Growth::NLogN)?;
    let ms_sq = bound(&ms, Growth::Quadratic)?;
    ensure(ms_nlogn.verdict == BoundVerdict::Consistent, || format!("merge-sort vs n log n: {ms_nlogn:?}"))?;
    ensure(ms_sq.verdict == BoundVerdict::Inconsistent, || format!("merge-sort vs n^2: {ms_sq:?}"))?;

    let is = steps("insertion-sort", InputKind::ReverseSorted)?;
    let is_sq = bound(&is, Growth::Quadratic)?;
    ensure(is_sq.verdict == BoundVerdict::Consistent, || format!("insertion-sort vs n^2: {is_sq:?}"))?;
    let top = is.len() - is.len().div_ceil(2);
    let ratios: Vec<f64> = is.windows(2).skip(top).map(|p| p[1].1 as f64 / p[0].1 as f64).collect();
    ensure(ratios.iter().all(|r| (DOUBLING.0..=DOUBLING.1).contains(r)), || format!("doubling ratios {ratios:?}"))?;

    let is_random = steps("insertion-sort", InputKind::Random)?;
    for (i, &(n, m)) in ms.iter().enumerate() {
        if n >= 512 {
            ensure(is[i].1 > m && is_random[i].1 > m, || {
                format!("at n = {n} insertion-sort does not exceed merge-sort")
            })?;
        }
    }
    Ok(format!(
        "merge-sort c in [{:.2}, {:.2}] for n log n; insertion-sort c in [{:.3}, {:.3}] for n^2, doubling ratios {:.3}..{:.3}",
        ms_nlogn.c_lo,
        ms_nlogn.c_hi,
        is_sq.c_lo,
        is_sq.c_hi,
        ratios.iter().copied().fold(f64::INFINITY, f64::min),
        ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    ))
}

fn sym(s: String) -> Value {
    Value::sym(&s)
}

fn c8_mapreduce() -> Check {
    let env = jobs_env();
    let mut rng = SplitMix64::new(SEED);
    for round in 0..100 {
        let docs: Vec<Vec<String>> =
            (0..rng.below(8)).map(|_| (0..rng.below(15)).map(|_| format!("w{}", rng.below(10))).collect()).collect();
        let input: Vec<(Value, Value)> = docs
            .iter()
            .enumerate()
            .map(|(i, ws)| (Value::from(i as i64), Value::list(ws.iter().cloned().map(sym))))
            .collect();
        let mut oracle: BTreeMap<String, i64> = BTreeMap::new();
        for w in docs.iter().flatten() {
            *oracle.entry(w.clone()).or_default() += 1;
        }
        let want: Vec<(Value, Value)> = oracle.into_iter().map(|(k, v)| (sym(k), Value::from(v))).collect();
        let got = job_wordcount(&input, &env).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("wordcount corpus {round}"))?;
    }

    for round in 0..50 {
        let nodes = 1 + rng.below(50);
        let edges: Vec<(u64, u64)> = (0..rng.below(4 * nodes)).map(|_| (rng.below(nodes), rng.below(nodes))).collect();
        let graph: Vec<(Value, Value)> = (0..nodes)
            .map(|s| {
                let ts = edges.iter().filter(|e| e.0 == s).map(|e| Value::from(e.1 as i64));
                (Value::from(s as i64), Value::list(ts.collect::<Vec<_>>()))
            })
            .collect();
        let mut want = Vec::new();
        for t in 0..nodes {
            let srcs: Vec<Value> =
                (0..nodes).filter(|&s| edges.contains(&(s, t))).map(|s| Value::from(s as i64)).collect();
            if !srcs.is_empty() {
                want.push((Value::from(t as i64), Value::list(srcs)));
            }
        }
        let got = invert_links(&graph, &env).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("invert_links graph {round}"))?;
    }

    // d has no out-links, so its rank is spread over every node.
    let names = ["a", "b", "c", "d"];
    let links: [&[usize]; 4] = [&[1, 2], &[2], &[0], &[]];
    let graph: Vec<(Value, Vec<Value>)> =
        (0..4).map(|i| (Value::sym(names[i]), links[i].iter().map(|&j| Value::sym(names[j])).collect())).collect();
    let d = parse_damping("0.85").map_err(|e| e.to_string())?;
    let rounds = pagerank_rounds(&graph, 50, &d).map_err(|e| e.to_string())?;
    ensure(rounds.len() == 51, || format!("{} rounds", rounds.len()))?;
    for (i, r) in rounds.iter().enumerate() {
        let s = r.iter().fold(BigRational::zero(), |acc, (_, x)| acc + x);
        ensure(s.is_one(), || format!("round {i} sums to {s}"))?;
    }
    let mut m = [[0.0f64; 4]; 4];
    for (j, ts) in links.iter().enumerate() {
        for (i, row) in m.iter_mut().enumerate() {
            row[j] = if ts.is_empty() {
                0.25
            } else if ts.contains(&i) {
                1.0 / ts.len() as f64
            } else {
                0.0
            };
        }
    }
    let mut p = [0.25f64; 4];
    for _ in 0..50 {
        p = m.map(|row| 0.15 / 4.0 + 0.85 * row.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>());
    }
    let last = rounds.last().unwrap();
    let mut worst = 0.0f64;
    for (i, (node, r)) in last.iter().enumerate() {
        ensure(*node == Value::sym(names[i]), || "rank order".into())?;
        let approx = num_traits::ToPrimitive::to_f64(r).unwrap();
        worst = worst.max((approx - p[i]).abs());
    }
    ensure(worst <= RANK_TOLERANCE, || format!("PageRank differs by {worst:e}"))?;
    Ok(format!("wordcount 100/100, invert_links 50/50, PageRank within {worst:.1e}, sums exactly 1 in all 51 rounds"))
}

fn c9_determinism() -> Check {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_eqthink"))
            .args(["ci", corpus().to_str().unwrap(), "--json", "--seed", "0"])
            .env_remove("EQTHINK_SEED")
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    ensure(a.status.success(), || format!("ci failed: {}", String::from_utf8_lossy(&a.stdout)))?;
    ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || "outputs differ".into())?;
    let j: serde_json::Value = serde_json::from_slice(&a.stdout).map_err(|e| e.to_string())?;
    ensure(j["schema"] == 1, || "schema is not 1".into())?;
    Ok(format!("two runs gave identical {} byte reports", a.stdout.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("absorption proof", c1_absorption),
        ("app-assoc", c2_app_assoc),
        ("app-pfx", c3_app_pfx),
        ("admissibility corpus", c4_three_cs),
        ("circuits", c5_circuits),
        ("bignum", c6_bignum),
        ("complexity", c7_complexity),
        ("mapreduce", c8_mapreduce),
        ("determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match r {
            Ok(detail) => println!("PASS {} {name}: {detail} [{:?}]", i + 1, start.elapsed()),
            Err(e) => {
                failed += 1;
                println!("FAIL {} {name}: {e} [{:?}]", i + 1, start.elapsed());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

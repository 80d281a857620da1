//! The three admissibility checks (consistent, comprehensive, constructive) and
//! compilation of equations into a single conditional body.

mod coverage;
mod unify;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::eval::{eval, DefEnv, Value};
use crate::syntax::{DefEquations, Domain, Equation, Pattern, RawDefun, Term};
use crate::testing::{generate, GenSpec, SplitMix64, DEFAULT_NATURAL_BOUND};

pub use coverage::uncovered;
pub use unify::{match_value, unify_vectors};

pub const RANDOM_TRIALS: u32 = 1000;
const CHECK_SEED: u64 = 0;
const CHECK_FUEL: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Verdict {
    Proved,
    TestedOnly,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub check: &'static str,
    /// Equation pair or call site the message is about.
    pub subject: String,
    pub message: String,
    /// Offending input, by parameter name.
    pub witness: Option<BTreeMap<String, Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub verdict: Verdict,
    pub diagnostics: Vec<Diagnostic>,
}

impl CheckResult {
    fn proved() -> Self {
        CheckResult { verdict: Verdict::Proved, diagnostics: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdmitError {
    #[error("`{0}` needs a :sig declaration to check comprehensiveness")]
    MissingSignature(String),
    #[error("`{0}` is not admitted")]
    NotAdmitted(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub name: String,
    pub consistent: Verdict,
    pub comprehensive: Verdict,
    pub constructive: Verdict,
    pub diagnostics: Vec<Diagnostic>,
    pub compiled: Option<RawDefun>,
}

impl AdmissibilityReport {
    pub fn admitted(&self) -> bool {
        self.compiled.is_some()
    }
}

fn naive_env(d: &DefEquations, ctx: &DefEnv) -> DefEnv {
    let mut env = ctx.clone().with_fuel(CHECK_FUEL);
    // Errors surface later as evaluation failures of individual trials.
    let _ = env.define_equations(d);
    env
}

fn domains_or_any(d: &DefEquations) -> Vec<Domain> {
    d.domains.clone().unwrap_or_else(|| vec![Domain::Any; d.params.len()])
}

fn domain_gen(dom: Domain) -> GenSpec {
    match dom {
        Domain::Nat => GenSpec::Natural(DEFAULT_NATURAL_BOUND),
        Domain::List => GenSpec::ListOf(Box::new(GenSpec::Integer)),
        Domain::Any => GenSpec::Object,
    }
}

/// Generator for each pattern variable, from its position and the declared domain.
fn var_gens(patterns: &[Pattern], doms: &[Domain]) -> BTreeMap<String, (GenSpec, bool)> {
    fn go(p: &Pattern, dom: Domain, out: &mut BTreeMap<String, (GenSpec, bool)>) {
        match p {
            Pattern::Var(v) => {
                out.insert(v.clone(), (domain_gen(dom), dom == Domain::Nat));
            }
            Pattern::Cons(h, t) => {
                let (hd, td) =
                    if dom == Domain::List { (Domain::Any, Domain::List) } else { (Domain::Any, Domain::Any) };
                match &**h {
                    Pattern::Var(v) if dom == Domain::List => {
                        out.insert(v.clone(), (GenSpec::Integer, false));
                    }
                    other => go(other, hd, out),
                }
                go(t, td, out);
            }
            Pattern::Succ(q) => go(q, Domain::Nat, out),
            Pattern::Int(_) | Pattern::Nil => {}
        }
    }
    let mut out = BTreeMap::new();
    for (p, &d) in patterns.iter().zip(doms) {
        go(p, d, &mut out);
    }
    out
}

/// Input vector built from `patterns`; trial 0 uses minimal values (0 or nil).
fn instantiate(
    patterns: &[Pattern],
    gens: &BTreeMap<String, (GenSpec, bool)>,
    rng: &mut SplitMix64,
    minimal: bool,
) -> Vec<Value> {
    patterns
        .iter()
        .map(|p| {
            unify::pattern_value(p, &mut |v, under_succ| {
                let (gen, nat) = gens.get(v).cloned().unwrap_or((GenSpec::Object, false));
                if minimal {
                    if nat || under_succ {
                        Value::from(0)
                    } else {
                        Value::nil()
                    }
                } else if under_succ {
                    generate(&GenSpec::Natural(DEFAULT_NATURAL_BOUND), rng)
                } else {
                    generate(&gen, rng)
                }
            })
        })
        .collect()
}

fn named(params: &[String], vals: &[Value]) -> BTreeMap<String, Value> {
    params.iter().cloned().zip(vals.iter().cloned()).collect()
}

fn show_input(name: &str, vals: &[Value]) -> String {
    let mut s = format!("({name}");
    for v in vals {
        s.push(' ');
        s.push_str(&v.to_term().to_string());
    }
    s.push(')');
    s
}

/// Bindings if `eq` applies to `inputs` (patterns match and guard holds).
fn applies(eq: &Equation, inputs: &[Value], env: &DefEnv) -> Option<BTreeMap<String, Value>> {
    let mut b = BTreeMap::new();
    if !eq.patterns.iter().zip(inputs).all(|(p, v)| match_value(p, v, &mut b)) {
        return None;
    }
    match &eq.guard {
        None => Some(b),
        Some(g) => match eval(g, &b, env) {
            Ok(v) if v.is_true() => Some(b),
            _ => None,
        },
    }
}

fn normalize_cmp(t: &Term) -> Term {
    match t {
        Term::App(op, args) if args.len() == 2 && (op == ">" || op == ">=") => {
            let flipped = if op == ">" { "<" } else { "<=" };
            Term::app(flipped, vec![args[1].clone(), args[0].clone()])
        }
        _ => t.clone(),
    }
}

/// Syntactic complements: `g` / `(not g)`, and `(< a b)` / `(<= b a)` up to `>`/`>=` flips.
pub fn complementary(g1: &Term, g2: &Term) -> bool {
    let is_not_of = |a: &Term, b: &Term| matches!(a, Term::App(op, args) if op == "not" && normalize_cmp(&args[0]) == normalize_cmp(b));
    if is_not_of(g1, g2) || is_not_of(g2, g1) {
        return true;
    }
    match (normalize_cmp(g1), normalize_cmp(g2)) {
        (Term::App(o1, a1), Term::App(o2, a2)) if a1.len() == 2 && a2.len() == 2 => {
            let swapped = a1[0] == a2[1] && a1[1] == a2[0];
            swapped && ((o1 == "<" && o2 == "<=") || (o1 == "<=" && o2 == "<"))
        }
        _ => false,
    }
}

/// Light partial evaluation: ground folding plus a few constructor facts.
fn simplify(t: &Term, env: &DefEnv) -> Term {
    let Term::App(op, args) = t else { return t.clone() };
    let args: Vec<Term> = args.iter().map(|a| simplify(a, env)).collect();
    let is_cons = |a: &Term| matches!(a, Term::App(o, _) if o == "cons");
    let folded = match (op.as_str(), args.as_slice()) {
        ("consp", [a]) if is_cons(a) => Some(Term::t()),
        ("atom" | "endp", [a]) if is_cons(a) => Some(Term::nil()),
        ("equal", [a, b]) if a == b => Some(Term::t()),
        ("and", [a, _]) | ("and", [_, a]) if a.is_nil() => Some(Term::nil()),
        ("or", [a, b]) if a.is_nil() && b.is_nil() => Some(Term::nil()),
        _ => None,
    };
    if let Some(f) = folded {
        return f;
    }
    let t = Term::App(op.clone(), args);
    if t.is_ground() {
        if let Ok(v) = crate::eval::eval_ground(&t, env) {
            return v.to_term();
        }
    }
    t
}

fn pattern_subst(eq: &Equation, s: &unify::PSubst, suffix: &str) -> BTreeMap<String, Term> {
    eq.pattern_vars()
        .into_iter()
        .map(|v| {
            let p = unify::resolve(&Pattern::Var(format!("{v}{suffix}")), s);
            (v, p.to_term())
        })
        .collect()
}

pub fn check_consistent(d: &DefEquations, ctx: &DefEnv) -> CheckResult {
    let env = naive_env(d, ctx);
    let doms = domains_or_any(d);
    let mut result = CheckResult::proved();
    for i in 0..d.equations.len() {
        for j in i + 1..d.equations.len() {
            let (e1, e2) = (&d.equations[i], &d.equations[j]);
            let Some((s, instance)) = unify_vectors(&e1.patterns, &e2.patterns) else { continue };
            let s1 = pattern_subst(e1, &s, "");
            let s2 = pattern_subst(e2, &s, "'");
            if e1.rhs.subst(&s1) == e2.rhs.subst(&s2) {
                continue;
            }
            let g1 = e1.guard.as_ref().map(|g| g.subst(&s1));
            let g2 = e2.guard.as_ref().map(|g| g.subst(&s2));
            if let (Some(a), Some(b)) = (&g1, &g2) {
                if complementary(a, b) {
                    continue;
                }
            }
            let both = Term::app("and", vec![g1.unwrap_or_else(Term::t), g2.unwrap_or_else(Term::t)]);
            if simplify(&both, &env).is_nil() {
                continue;
            }
            let subject = format!("{{{}}} / {{{}}}", e1.label, e2.label);
            let gens = var_gens(&instance, &doms);
            let mut witness = None;
            for trial in 0..RANDOM_TRIALS {
                let mut rng = SplitMix64::for_trial(CHECK_SEED, trial as u64);
                let inputs = instantiate(&instance, &gens, &mut rng, trial == 0);
                let (Some(b1), Some(b2)) = (applies(e1, &inputs, &env), applies(e2, &inputs, &env)) else { continue };
                let (Ok(v1), Ok(v2)) = (eval(&e1.rhs, &b1, &env), eval(&e2.rhs, &b2, &env)) else { continue };
                if v1 != v2 {
                    witness = Some((inputs, v1, v2));
                    break;
                }
            }
            match witness {
                Some((inputs, v1, v2)) => {
                    result.verdict = Verdict::Failed;
                    result.diagnostics.push(Diagnostic {
                        check: "consistent",
                        subject,
                        message: format!(
                            "both equations apply to {} but give {} and {}",
                            show_input(&d.name, &inputs),
                            v1,
                            v2
                        ),
                        witness: Some(named(&d.params, &inputs)),
                    });
                }
                None => {
                    result.verdict = result.verdict.max(Verdict::TestedOnly);
                    result.diagnostics.push(Diagnostic {
                        check: "consistent",
                        subject,
                        message: format!("overlap not decided syntactically; {RANDOM_TRIALS} random trials agreed"),
                        witness: None,
                    });
                }
            }
        }
    }
    result
}

/// Rows that count as unguarded: unguarded equations, plus one row for each
/// pair of equations with identical patterns and complementary guards.
fn unguarded_rows(d: &DefEquations) -> (Vec<Vec<Pattern>>, bool) {
    let mut rows = Vec::new();
    let mut guarded_left = false;
    let mut used = vec![false; d.equations.len()];
    for (i, e) in d.equations.iter().enumerate() {
        if e.guard.is_none() {
            rows.push(e.patterns.clone());
            used[i] = true;
        }
    }
    for i in 0..d.equations.len() {
        for j in i + 1..d.equations.len() {
            let (a, b) = (&d.equations[i], &d.equations[j]);
            if let (Some(ga), Some(gb)) = (&a.guard, &b.guard) {
                if a.patterns == b.patterns && complementary(ga, gb) {
                    rows.push(a.patterns.clone());
                    used[i] = true;
                    used[j] = true;
                }
            }
        }
    }
    for (i, e) in d.equations.iter().enumerate() {
        if !used[i] && e.guard.is_some() {
            guarded_left = true;
        }
    }
    (rows, guarded_left)
}

pub fn check_comprehensive(d: &DefEquations, ctx: &DefEnv) -> Result<CheckResult, AdmitError> {
    let all_vars = d.equations.iter().all(|e| e.patterns.iter().all(|p| matches!(p, Pattern::Var(_))));
    let doms = match &d.domains {
        Some(doms) => doms.clone(),
        None if all_vars => vec![Domain::Any; d.params.len()],
        None => return Err(AdmitError::MissingSignature(d.name.clone())),
    };
    let (rows, guarded_left) = unguarded_rows(d);
    let Some(missing) = uncovered(&rows, &doms) else {
        return Ok(CheckResult::proved());
    };
    if !guarded_left {
        return Ok(CheckResult {
            verdict: Verdict::Failed,
            diagnostics: vec![Diagnostic {
                check: "comprehensive",
                subject: d.name.clone(),
                message: format!("no equation matches {}", show_input(&d.name, &missing)),
                witness: Some(named(&d.params, &missing)),
            }],
        });
    }
    let env = naive_env(d, ctx);
    let gens: Vec<GenSpec> = doms.iter().map(|&dom| domain_gen(dom)).collect();
    let mut candidates = vec![missing];
    for trial in 0..RANDOM_TRIALS {
        let mut rng = SplitMix64::for_trial(CHECK_SEED, trial as u64);
        candidates.push(gens.iter().map(|g| generate(g, &mut rng)).collect());
    }
    for inputs in candidates {
        if !d.equations.iter().any(|e| applies(e, &inputs, &env).is_some()) {
            return Ok(CheckResult {
                verdict: Verdict::Failed,
                diagnostics: vec![Diagnostic {
                    check: "comprehensive",
                    subject: d.name.clone(),
                    message: format!("no equation applies to {}", show_input(&d.name, &inputs)),
                    witness: Some(named(&d.params, &inputs)),
                }],
            });
        }
    }
    Ok(CheckResult {
        verdict: Verdict::TestedOnly,
        diagnostics: vec![Diagnostic {
            check: "comprehensive",
            subject: d.name.clone(),
            message: format!("guards limit syntactic coverage; {RANDOM_TRIALS} random inputs all matched"),
            witness: None,
        }],
    })
}

fn recursive_calls<'a>(t: &'a Term, name: &str, out: &mut Vec<&'a [Term]>) {
    if let Term::App(op, args) = t {
        if op == name {
            out.push(args);
        }
        for a in args {
            recursive_calls(a, name, out);
        }
    }
}

fn equation_calls<'a>(e: &'a Equation, name: &str) -> Vec<&'a [Term]> {
    let mut calls = Vec::new();
    recursive_calls(&e.rhs, name, &mut calls);
    if let Some(g) = &e.guard {
        recursive_calls(g, name, &mut calls);
    }
    calls
}

/// Each argument unchanged or a strict sub-pattern of its position, at least one strict.
#[derive(Clone, Copy, PartialEq, Eq)]
enum ArgChange {
    Smaller,
    Same,
    Other,
}

fn arg_changes(patterns: &[Pattern], args: &[Term]) -> Vec<ArgChange> {
    patterns
        .iter()
        .zip(args)
        .map(|(p, a)| {
            if p.strict_subterms().contains(a) {
                ArgChange::Smaller
            } else if *a == p.to_term() {
                ArgChange::Same
            } else {
                ArgChange::Other
            }
        })
        .collect()
}

/// Lexicographic descent: repeatedly pick a position that no remaining call
/// changes except by shrinking it, and drop the calls that shrink it.
/// Returns the indices of calls left unaccounted for.
fn lexicographic_leftovers(calls: &[Vec<ArgChange>], arity: usize) -> Vec<usize> {
    let mut live: Vec<usize> = (0..calls.len()).collect();
    let mut used = vec![false; arity];
    loop {
        if live.is_empty() {
            return live;
        }
        let pick = (0..arity).find(|&i| {
            !used[i]
                && live.iter().all(|&c| calls[c][i] != ArgChange::Other)
                && live.iter().any(|&c| calls[c][i] == ArgChange::Smaller)
        });
        match pick {
            Some(i) => {
                used[i] = true;
                live.retain(|&c| calls[c][i] != ArgChange::Smaller);
            }
            None => return live,
        }
    }
}

pub fn check_constructive(d: &DefEquations, ctx: &DefEnv) -> CheckResult {
    let mut sites: Vec<(&Equation, String)> = Vec::new();
    let mut changes = Vec::new();
    for e in &d.equations {
        for args in equation_calls(e, &d.name) {
            changes.push(arg_changes(&e.patterns, args));
            sites.push((e, Term::app(d.name.clone(), args.to_vec()).to_string()));
        }
    }
    let bad: Vec<(&Equation, String)> =
        lexicographic_leftovers(&changes, d.params.len()).into_iter().map(|i| sites[i].clone()).collect();
    if bad.is_empty() {
        return CheckResult::proved();
    }
    let env = naive_env(d, ctx);
    let doms = domains_or_any(d);
    let Some(measure) = &d.measure else {
        let diagnostics = bad
            .iter()
            .map(|(e, call)| {
                let gens = var_gens(&e.patterns, &doms);
                let inputs = instantiate(&e.patterns, &gens, &mut SplitMix64::new(CHECK_SEED), true);
                Diagnostic {
                    check: "constructive",
                    subject: format!("{{{}}}: {}", e.label, call),
                    message: format!(
                        "recursive call is not structurally smaller and no :measure is declared; e.g. {} recurs with no argument reduced",
                        show_input(&d.name, &inputs)
                    ),
                    witness: Some(named(&d.params, &inputs)),
                }
            })
            .collect();
        return CheckResult { verdict: Verdict::Failed, diagnostics };
    };
    let recursive: Vec<&Equation> = d.equations.iter().filter(|e| !equation_calls(e, &d.name).is_empty()).collect();
    for trial in 0..RANDOM_TRIALS {
        let e = recursive[trial as usize % recursive.len()];
        let gens = var_gens(&e.patterns, &doms);
        let mut rng = SplitMix64::for_trial(CHECK_SEED, trial as u64);
        let inputs = instantiate(&e.patterns, &gens, &mut rng, trial < recursive.len() as u32);
        let Some(b) = applies(e, &inputs, &env) else { continue };
        let Ok(m_in) = eval(measure, &named(&d.params, &inputs), &env) else { continue };
        for args in equation_calls(e, &d.name) {
            let Ok(vals) = args.iter().map(|a| eval(a, &b, &env)).collect::<Result<Vec<_>, _>>() else { continue };
            let Ok(m_out) = eval(measure, &named(&d.params, &vals), &env) else { continue };
            let ok = m_in.is_natural() && m_out.is_natural() && m_out < m_in;
            if !ok {
                return CheckResult {
                    verdict: Verdict::Failed,
                    diagnostics: vec![Diagnostic {
                        check: "constructive",
                        subject: format!("{{{}}}: {}", e.label, Term::app(d.name.clone(), args.to_vec())),
                        message: format!(
                            "measure does not decrease: {} has measure {}, recursive call {} has {}",
                            show_input(&d.name, &inputs),
                            m_in,
                            show_input(&d.name, &vals),
                            m_out
                        ),
                        witness: Some(named(&d.params, &inputs)),
                    }],
                };
            }
        }
    }
    CheckResult {
        verdict: Verdict::TestedOnly,
        diagnostics: bad
            .iter()
            .map(|(e, call)| Diagnostic {
                check: "constructive",
                subject: format!("{{{}}}: {}", e.label, call),
                message: format!("measure decrease confirmed on {RANDOM_TRIALS} random trials only"),
                witness: None,
            })
            .collect(),
    }
}

fn and_chain(mut tests: Vec<Term>) -> Term {
    match tests.len() {
        0 => Term::t(),
        1 => tests.pop().unwrap(),
        _ => {
            let last = tests.pop().unwrap();
            tests.into_iter().rev().fold(last, |acc, t| Term::app("and", vec![t, acc]))
        }
    }
}

fn or_chain(mut tests: Vec<Term>) -> Term {
    let last = tests.pop().expect("non-empty group");
    tests.into_iter().rev().fold(last, |acc, t| Term::app("or", vec![t, acc]))
}

/// Tests that recognize `p` at `at`, and accessor terms for its variables.
fn pattern_tests(p: &Pattern, at: Term, tests: &mut Vec<Term>, access: &mut BTreeMap<String, Term>) {
    match p {
        Pattern::Var(v) => {
            access.insert(v.clone(), at);
        }
        Pattern::Int(n) => tests.push(Term::app("equal", vec![at, Term::Int(n.clone())])),
        Pattern::Nil => tests.push(Term::app("equal", vec![at, Term::nil()])),
        Pattern::Cons(h, t) => {
            tests.push(Term::app("consp", vec![at.clone()]));
            pattern_tests(h, Term::app("first", vec![at.clone()]), tests, access);
            pattern_tests(t, Term::app("rest", vec![at]), tests, access);
        }
        Pattern::Succ(q) => {
            tests.push(Term::app("not", vec![Term::app("zp", vec![at.clone()])]));
            pattern_tests(q, Term::app("-", vec![at, Term::int(1)]), tests, access);
        }
    }
}

/// Test and right-hand side of an equation, both over the parameters.
fn compile_equation(d: &DefEquations, e: &Equation) -> (Term, Term) {
    let mut tests = Vec::new();
    let mut access = BTreeMap::new();
    for (p, param) in e.patterns.iter().zip(&d.params) {
        pattern_tests(p, Term::var(param.clone()), &mut tests, &mut access);
    }
    if let Some(g) = &e.guard {
        tests.push(g.subst(&access));
    }
    (and_chain(tests), e.rhs.subst(&access))
}

fn compile_with(d: &DefEquations, consistent_proved: bool, comprehensive_proved: bool) -> RawDefun {
    let compiled: Vec<(Term, Term)> = d.equations.iter().map(|e| compile_equation(d, e)).collect();
    // (tests, rhs) per branch, in order
    let mut groups: Vec<(Vec<Term>, Term)> = Vec::new();
    if consistent_proved {
        for (test, rhs) in compiled {
            match groups.iter_mut().find(|(_, r)| *r == rhs) {
                Some((tests, _)) => tests.push(test),
                None => groups.push((vec![test], rhs)),
            }
        }
    } else {
        groups = compiled.into_iter().map(|(t, r)| (vec![t], r)).collect();
    }
    let else_idx = if !comprehensive_proved {
        None
    } else if consistent_proved {
        let max = groups.iter().map(|g| g.0.len()).max().unwrap_or(0);
        let recursive = |r: &Term| r.operators().contains(&d.name);
        groups
            .iter()
            .position(|g| g.0.len() == max && !recursive(&g.1))
            .or_else(|| groups.iter().position(|g| g.0.len() == max))
    } else {
        Some(groups.len() - 1)
    };
    let mut body = match else_idx {
        Some(i) => groups.remove(i).1,
        None => Term::nil(),
    };
    for (tests, rhs) in groups.into_iter().rev() {
        body = Term::app("if", vec![or_chain(tests), rhs, body]);
    }
    RawDefun { name: d.name.clone(), params: d.params.clone(), body, trust: false }
}

/// Runs all three checks; the compiled body is present iff none failed.
pub fn admit(d: &DefEquations, ctx: &DefEnv) -> AdmissibilityReport {
    let consistent = check_consistent(d, ctx);
    let comprehensive = check_comprehensive(d, ctx).unwrap_or_else(|e| CheckResult {
        verdict: Verdict::Failed,
        diagnostics: vec![Diagnostic {
            check: "comprehensive",
            subject: d.name.clone(),
            message: e.to_string(),
            witness: None,
        }],
    });
    let constructive = check_constructive(d, ctx);
    let failed = [&consistent, &comprehensive, &constructive].iter().any(|c| c.verdict == Verdict::Failed);
    let compiled = (!failed)
        .then(|| compile_with(d, consistent.verdict == Verdict::Proved, comprehensive.verdict == Verdict::Proved));
    let mut diagnostics = consistent.diagnostics;
    diagnostics.extend(comprehensive.diagnostics);
    diagnostics.extend(constructive.diagnostics);
    AdmissibilityReport {
        name: d.name.clone(),
        consistent: consistent.verdict,
        comprehensive: comprehensive.verdict,
        constructive: constructive.verdict,
        diagnostics,
        compiled,
    }
}

pub fn compile_to_defun(d: &DefEquations, ctx: &DefEnv) -> Result<RawDefun, AdmitError> {
    admit(d, ctx).compiled.ok_or_else(|| AdmitError::NotAdmitted(d.name.clone()))
}

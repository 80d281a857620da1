//! Top-level forms: `defequations`, `defun`, `defproperty`, `defproof`, `include`.

use std::collections::BTreeSet;

use serde::Serialize;

use super::prims::primitive_arity;
use super::reader::{read_all, Sexp, SexpKind};
use super::term::{pattern_from_sexp, term_from_sexp, Pattern, Term};
use super::{ErrorCode, Loc, SyntaxError};
use crate::testing::GenSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Nat,
    List,
    Any,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub label: String,
    pub patterns: Vec<Pattern>,
    pub guard: Option<Term>,
    pub rhs: Term,
    pub loc: Loc,
}

impl Equation {
    pub fn pattern_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.patterns {
            p.collect_vars(&mut out);
        }
        out
    }

    /// The left-hand side as a term, `(name p1 ... pn)`.
    pub fn lhs_term(&self, name: &str) -> Term {
        Term::app(name, self.patterns.iter().map(Pattern::to_term).collect())
    }
}

/// A named operator given by ordered, labeled, optionally guarded pattern equations.
#[derive(Debug, Clone, PartialEq)]
pub struct DefEquations {
    pub name: String,
    pub params: Vec<String>,
    pub domains: Option<Vec<Domain>>,
    pub measure: Option<Term>,
    pub equations: Vec<Equation>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawDefun {
    pub name: String,
    pub params: Vec<String>,
    pub body: Term,
    pub trust: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binder {
    pub var: String,
    pub gen: GenSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub name: String,
    pub binders: Vec<Binder>,
    pub claim: Term,
    pub trials: u32,
}

pub const DEFAULT_TRIALS: u32 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Goal {
    pub hyps: Vec<Term>,
    pub lhs: Term,
    pub rhs: Term,
}

impl Goal {
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.lhs.collect_vars(&mut out);
        self.rhs.collect_vars(&mut out);
        for h in &self.hyps {
            h.collect_vars(&mut out);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    List,
    Nat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Equational,
    Induction { scheme: Scheme, var: String, head: Option<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub term: Term,
    pub label: String,
    pub direction: Option<Direction>,
    /// 0-based argument path (written 1-based in source).
    pub position: Option<Vec<usize>>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub start: Term,
    pub steps: Vec<Step>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofScript {
    pub name: String,
    pub goal: Goal,
    pub method: Method,
    /// One chain for equational proofs; base then step for induction.
    pub cases: Vec<Chain>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TopFormKind {
    DefEquations(DefEquations),
    RawDefun(RawDefun),
    Property(Property),
    Proof(ProofScript),
    Directive { kind: String, payload: Vec<Sexp> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopForm {
    pub kind: TopFormKind,
    pub loc: Loc,
    pub file: Option<String>,
}

impl TopForm {
    pub fn name(&self) -> Option<&str> {
        match &self.kind {
            TopFormKind::DefEquations(d) => Some(&d.name),
            TopFormKind::RawDefun(d) => Some(&d.name),
            TopFormKind::Property(p) => Some(&p.name),
            TopFormKind::Proof(p) => Some(&p.name),
            TopFormKind::Directive { .. } => None,
        }
    }
}

pub fn parse_program(text: &str) -> Result<Vec<TopForm>, SyntaxError> {
    parse_forms(text, None)
}

pub fn parse_program_named(text: &str, file: &str) -> Result<Vec<TopForm>, SyntaxError> {
    parse_forms(text, Some(file)).map_err(|e| e.in_file(file))
}

fn parse_forms(text: &str, file: Option<&str>) -> Result<Vec<TopForm>, SyntaxError> {
    let mut forms = Vec::new();
    let mut defined = BTreeSet::new();
    let mut named = BTreeSet::new();
    for sexp in read_all(text)? {
        let form = parse_top(&sexp)?;
        let dup = match &form.kind {
            TopFormKind::DefEquations(d) => !defined.insert(d.name.clone()),
            TopFormKind::RawDefun(d) => !defined.insert(d.name.clone()),
            TopFormKind::Property(p) => !named.insert(("property", p.name.clone())),
            TopFormKind::Proof(p) => !named.insert(("proof", p.name.clone())),
            TopFormKind::Directive { .. } => false,
        };
        if dup {
            return Err(SyntaxError::new(
                ErrorCode::DuplicateDefinition,
                format!("`{}` is defined more than once", form.name().unwrap_or_default()),
                sexp.loc,
            ));
        }
        forms.push(TopForm { file: file.map(str::to_string), ..form });
    }
    Ok(forms)
}

fn err(code: ErrorCode, msg: impl Into<String>, loc: Loc) -> SyntaxError {
    SyntaxError::new(code, msg, loc)
}

fn ident(s: &Sexp, what: &str) -> Result<String, SyntaxError> {
    match s.as_ident() {
        Some(name) if name != "t" && name != "nil" => Ok(name.to_string()),
        _ => Err(err(ErrorCode::BadForm, format!("expected {what}"), s.loc)),
    }
}

fn params(s: &Sexp) -> Result<Vec<String>, SyntaxError> {
    let items = s.as_list().ok_or_else(|| err(ErrorCode::BadForm, "expected parameter list", s.loc))?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for item in items {
        let p = ident(item, "parameter name")?;
        if !seen.insert(p.clone()) {
            return Err(err(ErrorCode::BadForm, format!("duplicate parameter `{p}`"), item.loc));
        }
        out.push(p);
    }
    Ok(out)
}

fn parse_top(s: &Sexp) -> Result<TopForm, SyntaxError> {
    let items = s
        .as_list()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| err(ErrorCode::BadForm, "top-level forms must be non-empty lists", s.loc))?;
    let head = items[0].as_ident().unwrap_or_default();
    let kind = match head {
        "defequations" => TopFormKind::DefEquations(parse_defequations(s, items)?),
        "defun" => TopFormKind::RawDefun(parse_defun(s, items)?),
        "defproperty" => TopFormKind::Property(parse_property(s, items)?),
        "defproof" => TopFormKind::Proof(parse_proof(s, items)?),
        "include" => TopFormKind::Directive { kind: head.to_string(), payload: items[1..].to_vec() },
        _ => return Err(err(ErrorCode::BadForm, format!("unknown top-level form `{head}`"), items[0].loc)),
    };
    Ok(TopForm { kind, loc: s.loc, file: None })
}

fn check_not_primitive(name: &str, loc: Loc) -> Result<(), SyntaxError> {
    if primitive_arity(name).is_some() {
        return Err(err(ErrorCode::DuplicateDefinition, format!("`{name}` is a built-in operator"), loc));
    }
    Ok(())
}

fn parse_defequations(s: &Sexp, items: &[Sexp]) -> Result<DefEquations, SyntaxError> {
    if items.len() < 3 {
        return Err(err(ErrorCode::BadForm, "usage: (defequations name (params) equation...)", s.loc));
    }
    let name = ident(&items[1], "definition name")?;
    check_not_primitive(&name, items[1].loc)?;
    let params = params(&items[2])?;
    let mut domains = None;
    let mut measure = None;
    let mut equations: Vec<Equation> = Vec::new();
    let mut i = 3;
    while i < items.len() {
        let item = &items[i];
        if let Some(kw) = item.as_keyword() {
            let arg = items
                .get(i + 1)
                .ok_or_else(|| err(ErrorCode::BadForm, format!("`:{kw}` needs an argument"), item.loc))?;
            match kw {
                "sig" => {
                    let doms =
                        arg.as_list().ok_or_else(|| err(ErrorCode::BadForm, "expected (domain ...)", arg.loc))?;
                    let parsed = doms
                        .iter()
                        .map(|d| match d.as_ident() {
                            Some("nat") => Ok(Domain::Nat),
                            Some("list") => Ok(Domain::List),
                            Some("any") => Ok(Domain::Any),
                            _ => Err(err(ErrorCode::BadForm, "domains are nat, list or any", d.loc)),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    if parsed.len() != params.len() {
                        return Err(err(ErrorCode::BadArity, "one domain per parameter", arg.loc));
                    }
                    domains = Some(parsed);
                }
                "measure" => {
                    let m = term_from_sexp(arg)?;
                    let pset: BTreeSet<_> = params.iter().cloned().collect();
                    if let Some(v) = m.free_vars().difference(&pset).next() {
                        return Err(err(ErrorCode::UnboundVariable, format!("measure mentions `{v}`"), arg.loc));
                    }
                    measure = Some(m);
                }
                _ => return Err(err(ErrorCode::BadForm, format!("unknown option `:{kw}`"), item.loc)),
            }
            i += 2;
            continue;
        }
        let eq = parse_equation(item, &name, params.len())?;
        if equations.iter().any(|e| e.label == eq.label) {
            return Err(err(ErrorCode::DuplicateLabel, format!("label `{}` used twice", eq.label), item.loc));
        }
        equations.push(eq);
        i += 1;
    }
    if equations.is_empty() {
        return Err(err(ErrorCode::BadForm, "a definition needs at least one equation", s.loc));
    }
    Ok(DefEquations { name, params, domains, measure, equations, loc: s.loc })
}

fn parse_equation(s: &Sexp, name: &str, arity: usize) -> Result<Equation, SyntaxError> {
    let usage = || err(ErrorCode::BadForm, "usage: (label (name pattern...) = rhs [:if guard])", s.loc);
    let items = s.as_list().ok_or_else(usage)?;
    if !(items.len() == 4 || items.len() == 6) || items[2].as_ident() != Some("=") {
        return Err(usage());
    }
    let label = items[0].as_ident().ok_or_else(usage)?.to_string();
    let lhs = items[1].as_list().ok_or_else(usage)?;
    if lhs.first().and_then(Sexp::as_ident) != Some(name) {
        return Err(err(ErrorCode::BadForm, format!("left-hand side must apply `{name}`"), items[1].loc));
    }
    if lhs.len() - 1 != arity {
        return Err(err(ErrorCode::BadArity, format!("`{name}` takes {arity} arguments"), items[1].loc));
    }
    let patterns = lhs[1..].iter().map(pattern_from_sexp).collect::<Result<Vec<_>, _>>()?;
    let mut seen = BTreeSet::new();
    for p in &patterns {
        for v in p.vars() {
            if !seen.insert(v.clone()) {
                return Err(err(
                    ErrorCode::NonLinearPattern,
                    format!("`{v}` occurs twice in the patterns"),
                    items[1].loc,
                ));
            }
        }
    }
    let rhs = term_from_sexp(&items[3])?;
    let guard = if items.len() == 6 {
        if items[4].as_keyword() != Some("if") {
            return Err(usage());
        }
        Some(term_from_sexp(&items[5])?)
    } else {
        None
    };
    for (t, what) in [(Some(&rhs), "right-hand side"), (guard.as_ref(), "guard")] {
        if let Some(t) = t {
            if let Some(v) = t.free_vars().difference(&seen).next() {
                return Err(err(
                    ErrorCode::UnboundVariable,
                    format!("{what} of `{label}` mentions `{v}`, which no pattern binds"),
                    s.loc,
                ));
            }
        }
    }
    Ok(Equation { label, patterns, guard, rhs, loc: s.loc })
}

fn parse_defun(s: &Sexp, items: &[Sexp]) -> Result<RawDefun, SyntaxError> {
    let usage = || err(ErrorCode::BadForm, "usage: (defun name (params) [:trust] body)", s.loc);
    if items.len() < 4 {
        return Err(usage());
    }
    let name = ident(&items[1], "function name")?;
    check_not_primitive(&name, items[1].loc)?;
    let params = params(&items[2])?;
    let (trust, body) = match &items[3..] {
        [b] => (false, b),
        [kw, b] if kw.as_keyword() == Some("trust") => (true, b),
        _ => return Err(usage()),
    };
    let body = term_from_sexp(body)?;
    let pset: BTreeSet<_> = params.iter().cloned().collect();
    if let Some(v) = body.free_vars().difference(&pset).next() {
        return Err(err(ErrorCode::UnboundVariable, format!("body mentions unbound `{v}`"), s.loc));
    }
    Ok(RawDefun { name, params, body, trust })
}

fn parse_gen(s: &Sexp) -> Result<GenSpec, SyntaxError> {
    let bad = || {
        err(
            ErrorCode::BadForm,
            "generators: (random-integer), (random-natural [bound]), (random-list-of g), (random-object), (random-symbol [sym...]), (random-boolean)",
            s.loc,
        )
    };
    let items = s.as_list().filter(|l| !l.is_empty()).ok_or_else(bad)?;
    let rest = &items[1..];
    match (items[0].as_ident().ok_or_else(bad)?, rest) {
        ("random-integer", []) => Ok(GenSpec::Integer),
        ("random-natural", []) => Ok(GenSpec::Natural(crate::testing::DEFAULT_NATURAL_BOUND)),
        ("random-natural", [b]) => match &b.kind {
            SexpKind::Int(n) => n.try_into().map(GenSpec::Natural).map_err(|_| bad()),
            _ => Err(bad()),
        },
        ("random-list-of", [g]) => Ok(GenSpec::ListOf(Box::new(parse_gen(g)?))),
        ("random-object", []) => Ok(GenSpec::Object),
        ("random-boolean", []) => Ok(GenSpec::Symbol(vec!["t".into(), "nil".into()])),
        ("random-symbol", []) => Ok(GenSpec::default_symbols()),
        ("random-symbol", syms) => syms
            .iter()
            .map(|x| x.as_ident().map(str::to_string).ok_or_else(bad))
            .collect::<Result<_, _>>()
            .map(GenSpec::Symbol),
        _ => Err(bad()),
    }
}

fn parse_property(s: &Sexp, items: &[Sexp]) -> Result<Property, SyntaxError> {
    let usage = || err(ErrorCode::BadForm, "usage: (defproperty name (var :value gen ...) [:repeat n] claim)", s.loc);
    if items.len() < 4 {
        return Err(usage());
    }
    let name = ident(&items[1], "property name")?;
    let binder_items = items[2].as_list().ok_or_else(usage)?;
    if binder_items.len() % 3 != 0 {
        return Err(usage());
    }
    let mut binders: Vec<Binder> = Vec::new();
    for chunk in binder_items.chunks(3) {
        let var = ident(&chunk[0], "binder variable")?;
        if chunk[1].as_keyword() != Some("value") {
            return Err(err(ErrorCode::BadForm, "expected `:value` after binder variable", chunk[1].loc));
        }
        if binders.iter().any(|b| b.var == var) {
            return Err(err(ErrorCode::BadForm, format!("`{var}` bound twice"), chunk[0].loc));
        }
        binders.push(Binder { var, gen: parse_gen(&chunk[2])? });
    }
    let mut trials = DEFAULT_TRIALS;
    let mut i = 3;
    while let Some(kw) = items.get(i).and_then(Sexp::as_keyword) {
        match (kw, items.get(i + 1).map(|x| &x.kind)) {
            ("repeat" | "trials", Some(SexpKind::Int(n))) => {
                trials = n.try_into().map_err(|_| usage())?;
            }
            _ => return Err(usage()),
        }
        i += 2;
    }
    if i + 1 != items.len() {
        return Err(usage());
    }
    let claim = term_from_sexp(&items[i])?;
    let bound: BTreeSet<_> = binders.iter().map(|b| b.var.clone()).collect();
    if let Some(v) = claim.free_vars().difference(&bound).next() {
        return Err(err(ErrorCode::UnboundVariable, format!("claim mentions unbound `{v}`"), items[i].loc));
    }
    Ok(Property { name, binders, claim, trials })
}

fn split_conjuncts(t: Term, out: &mut Vec<Term>) {
    match t {
        Term::App(op, args) if op == "and" => {
            for a in args {
                split_conjuncts(a, out);
            }
        }
        other => out.push(other),
    }
}

fn parse_goal(s: &Sexp) -> Result<Goal, SyntaxError> {
    let bad = || err(ErrorCode::BadForm, "goal must be (equal lhs rhs) or (implies hyp (equal lhs rhs))", s.loc);
    let t = term_from_sexp(s)?;
    let (hyps, concl) = match t {
        Term::App(op, mut args) if op == "implies" => {
            let concl = args.pop().unwrap();
            let mut hyps = Vec::new();
            split_conjuncts(args.pop().unwrap(), &mut hyps);
            (hyps, concl)
        }
        other => (Vec::new(), other),
    };
    match concl {
        Term::App(op, mut args) if op == "equal" => {
            let rhs = args.pop().unwrap();
            let lhs = args.pop().unwrap();
            Ok(Goal { hyps, lhs, rhs })
        }
        _ => Err(bad()),
    }
}

fn parse_step(s: &Sexp) -> Result<Step, SyntaxError> {
    let usage = || err(ErrorCode::BadForm, "usage: (= term label [:reverse|:forward] [:at (i ...)])", s.loc);
    let items = s.as_list().ok_or_else(usage)?;
    if items.len() < 3 || items[0].as_ident() != Some("=") {
        return Err(usage());
    }
    let term = term_from_sexp(&items[1])?;
    let label = items[2].as_ident().ok_or_else(usage)?.to_string();
    let mut direction = None;
    let mut position = None;
    let mut i = 3;
    while i < items.len() {
        match items[i].as_keyword() {
            Some("reverse") => direction = Some(Direction::Reverse),
            Some("forward") => direction = Some(Direction::Forward),
            Some("at") => {
                let path = items.get(i + 1).and_then(Sexp::as_list).ok_or_else(usage)?;
                let mut p = Vec::new();
                for idx in path {
                    match &idx.kind {
                        SexpKind::Int(n) => {
                            let k: usize = n.try_into().map_err(|_| usage())?;
                            if k == 0 {
                                return Err(err(ErrorCode::BadForm, "positions are 1-based", idx.loc));
                            }
                            p.push(k - 1);
                        }
                        _ => return Err(usage()),
                    }
                }
                position = Some(p);
                i += 1;
            }
            _ => return Err(usage()),
        }
        i += 1;
    }
    Ok(Step { term, label, direction, position, loc: s.loc })
}

fn parse_chain(s: &Sexp, items: &[Sexp]) -> Result<Chain, SyntaxError> {
    let Some(first) = items.get(1) else {
        return Err(err(ErrorCode::BadForm, "a chain needs a starting term", s.loc));
    };
    let start = term_from_sexp(first)?;
    let steps = items[2..].iter().map(parse_step).collect::<Result<Vec<_>, _>>()?;
    Ok(Chain { start, steps, loc: s.loc })
}

fn parse_proof(s: &Sexp, items: &[Sexp]) -> Result<ProofScript, SyntaxError> {
    let usage = || {
        err(
            ErrorCode::BadForm,
            "usage: (defproof name :goal G [:induct (list|nat var [head])] (chain ...) | (base ...) (step ...))",
            s.loc,
        )
    };
    if items.len() < 4 {
        return Err(usage());
    }
    let name = ident(&items[1], "proof name")?;
    let mut goal = None;
    let mut method = Method::Equational;
    let mut chain = None;
    let mut base = None;
    let mut step = None;
    let mut i = 2;
    while i < items.len() {
        let item = &items[i];
        if let Some(kw) = item.as_keyword() {
            let arg = items.get(i + 1).ok_or_else(usage)?;
            match kw {
                "goal" => goal = Some(parse_goal(arg)?),
                "induct" => {
                    let spec = arg.as_list().ok_or_else(usage)?;
                    let scheme = match spec.first().and_then(Sexp::as_ident) {
                        Some("list") => Scheme::List,
                        Some("nat") => Scheme::Nat,
                        _ => return Err(err(ErrorCode::BadForm, "induction schemes are `list` and `nat`", arg.loc)),
                    };
                    let var = spec.get(1).map(|v| ident(v, "induction variable")).transpose()?.ok_or_else(usage)?;
                    let head = spec.get(2).map(|v| ident(v, "head variable")).transpose()?;
                    if spec.len() > 3 {
                        return Err(usage());
                    }
                    method = Method::Induction { scheme, var, head };
                }
                _ => return Err(usage()),
            }
            i += 2;
            continue;
        }
        let parts = item.as_list().filter(|l| !l.is_empty()).ok_or_else(usage)?;
        let slot = match parts[0].as_ident() {
            Some("chain") => &mut chain,
            Some("base") => &mut base,
            Some("step") => &mut step,
            _ => return Err(usage()),
        };
        if slot.is_some() {
            return Err(err(ErrorCode::BadForm, "chain given twice", item.loc));
        }
        *slot = Some(parse_chain(item, parts)?);
        i += 1;
    }
    let goal = goal.ok_or_else(|| err(ErrorCode::BadForm, "missing :goal", s.loc))?;
    let cases = match (&method, chain, base, step) {
        (Method::Equational, Some(c), None, None) => vec![c],
        (Method::Induction { .. }, None, Some(b), Some(st)) => vec![b, st],
        (Method::Equational, ..) => {
            return Err(err(ErrorCode::BadForm, "equational proofs take exactly one (chain ...)", s.loc))
        }
        (Method::Induction { .. }, ..) => {
            return Err(err(ErrorCode::BadForm, "induction proofs take (base ...) and (step ...)", s.loc))
        }
    };
    if let Method::Induction { var, .. } = &method {
        if !goal.free_vars().contains(var) {
            return Err(err(
                ErrorCode::BadForm,
                format!("induction variable `{var}` does not occur in the goal"),
                s.loc,
            ));
        }
    }
    Ok(ProofScript { name, goal, method, cases })
}

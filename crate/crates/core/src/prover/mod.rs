//! Equational proof checking.
//!
//! A proof is a chain of terms where each step names the rule that justifies
//! it. The checker locates the rewritten subterm from the pair of terms
//! itself, so a position is needed only when a step leaves the term unchanged.

mod matching;
mod rules;
mod truth;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::eval::{eval_ground, DefEnv};
use crate::syntax::{Direction, Goal, Method, ProofScript, Scheme, Term};

pub use matching::{divergence, match_into, match_term, Subst};
pub use rules::{conjoin, conjuncts, is_natural_expr, RewriteRule, RuleDb, RuleSource};
pub use truth::{derive_truth_table, TableError, TruthTable, MAX_TABLE_VARS};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "error", content = "detail", rename_all = "snake_case")]
pub enum StepError {
    #[error("no position rewrites the term into the next one")]
    NoMatchingPosition,
    #[error("several positions fit; give one with :at")]
    AmbiguousWithoutPosition,
    #[error("condition not established: {0}")]
    ConditionUnmet(String),
    #[error("unknown rule label `{0}`")]
    UnknownLabel(String),
    #[error("chain endpoints do not match the goal: {0}")]
    ChainEndpointsWrong(String),
    #[error("bad induction: {0}")]
    BadInduction(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ProofOutcome {
    Accepted,
    /// `step` is 1-based; 0 means the chain's starting term.
    RejectedAt {
        case: String,
        step: usize,
        reason: StepError,
    },
}

impl ProofOutcome {
    pub fn accepted(&self) -> bool {
        matches!(self, ProofOutcome::Accepted)
    }
}

/// Facts available while checking one case of a proof.
#[derive(Debug, Clone, Default)]
pub struct StepContext {
    pub facts: BTreeSet<Term>,
    pub nat_vars: BTreeSet<String>,
    pub rigid: BTreeSet<String>,
    pub ind_hyp: Option<RewriteRule>,
}

impl StepContext {
    /// Hypotheses split into conjuncts and closed under unconditional
    /// definitional rewriting at the root.
    pub fn from_hyps(hyps: &[Term], db: &RuleDb) -> Self {
        let mut ctx = StepContext::default();
        let mut work = Vec::new();
        for h in hyps {
            conjuncts(h, &mut work);
        }
        let defs: Vec<&RewriteRule> = db.unconditional_definitions().collect();
        while let Some(h) = work.pop() {
            if ctx.facts.len() > 256 || !ctx.facts.insert(h.clone()) {
                continue;
            }
            if let Term::App(op, args) = &h {
                if op == "natp" && args.len() == 1 {
                    if let Term::Var(v) = &args[0] {
                        ctx.nat_vars.insert(v.clone());
                    }
                }
            }
            for r in &defs {
                if let Some(s) = match_term(&r.lhs, &h) {
                    if r.rhs.free_vars().iter().all(|v| s.contains_key(v)) {
                        conjuncts(&r.rhs.subst(&s), &mut work);
                    }
                }
            }
        }
        ctx
    }

    fn holds(&self, c: &Term, db: &RuleDb, env: &DefEnv) -> bool {
        let mut parts = Vec::new();
        conjuncts(c, &mut parts);
        parts.iter().all(|p| {
            if self.facts.contains(p) || *p == Term::t() {
                return true;
            }
            if p.is_ground() {
                if let Ok(v) = eval_ground(p, env) {
                    return v.is_true();
                }
            }
            match p {
                Term::App(op, args) if op == "natp" && args.len() == 1 => {
                    is_natural_expr(&args[0], db.natural_functions(), &self.nat_vars)
                }
                _ => false,
            }
        })
    }
}

enum Attempt {
    Ok,
    Unmet(Term),
    NoFit,
}

#[allow(clippy::too_many_arguments)]
fn try_at(
    cur: &Term,
    next: &Term,
    q: &[usize],
    l: &Term,
    r: &Term,
    cond: Option<&Term>,
    rigid: &BTreeSet<String>,
    ctx: &StepContext,
    db: &RuleDb,
    env: &DefEnv,
) -> Attempt {
    let (Some(sub), Some(target)) = (cur.at(q), next.at(q)) else { return Attempt::NoFit };
    let mut s = Subst::new();
    if !match_into(l, sub, rigid, &mut s) || !match_into(r, target, rigid, &mut s) {
        return Attempt::NoFit;
    }
    if cur.replace_at(q, r.subst(&s)) != *next {
        return Attempt::NoFit;
    }
    match cond {
        None => Attempt::Ok,
        Some(c) => {
            let inst = c.subst(&s);
            let bound = c.free_vars().iter().all(|v| s.contains_key(v) || rigid.contains(v));
            if bound && ctx.holds(&inst, db, env) {
                Attempt::Ok
            } else {
                Attempt::Unmet(inst)
            }
        }
    }
}

fn candidate_positions(cur: &Term, next: &Term, position: Option<&[usize]>) -> Vec<Vec<usize>> {
    if let Some(p) = position {
        return vec![p.to_vec()];
    }
    match divergence(cur, next) {
        Some(d) => (0..=d.len()).map(|i| d[..i].to_vec()).collect(),
        None => cur.positions(),
    }
}

fn is_arith(t: &Term) -> bool {
    match t {
        Term::Int(_) => true,
        Term::App(op, args) => {
            matches!(op.as_str(), "+" | "-" | "*" | "1+" | "1-" | "max" | "min" | "floor" | "mod")
                && args.iter().all(is_arith)
        }
        _ => false,
    }
}

/// Checks one rewrite step `cur → next` by any rule carrying `label`.
#[allow(clippy::too_many_arguments)]
pub fn check_step(
    cur: &Term,
    next: &Term,
    label: &str,
    direction: Option<Direction>,
    position: Option<&[usize]>,
    ctx: &StepContext,
    db: &RuleDb,
    env: &DefEnv,
) -> Result<(), StepError> {
    match label {
        "cons" => {
            return if cur == next { Ok(()) } else { Err(StepError::NoMatchingPosition) };
        }
        "arith" => {
            for q in candidate_positions(cur, next, position) {
                let (Some(sub), Some(target)) = (cur.at(&q), next.at(&q)) else { continue };
                if matches!(sub, Term::App(..)) && is_arith(sub) && cur.replace_at(&q, target.clone()) == *next {
                    if let Ok(v) = eval_ground(sub, env) {
                        if v.to_term() == *target {
                            return Ok(());
                        }
                    }
                }
            }
            return Err(StepError::NoMatchingPosition);
        }
        _ => {}
    }
    let found: Vec<&RewriteRule> = if label == "ind-hyp" { ctx.ind_hyp.iter().collect() } else { db.lookup(label) };
    if found.is_empty() {
        return Err(StepError::UnknownLabel(label.to_string()));
    }
    let none = BTreeSet::new();
    let rigid = if label == "ind-hyp" { &ctx.rigid } else { &none };
    rewrite_with(cur, next, &found, direction, position, rigid, ctx, db, env)
}

#[allow(clippy::too_many_arguments)]
fn rewrite_with(
    cur: &Term,
    next: &Term,
    rules: &[&RewriteRule],
    direction: Option<Direction>,
    position: Option<&[usize]>,
    rigid: &BTreeSet<String>,
    ctx: &StepContext,
    db: &RuleDb,
    env: &DefEnv,
) -> Result<(), StepError> {
    let dirs: &[Direction] = match direction {
        Some(Direction::Forward) => &[Direction::Forward],
        Some(Direction::Reverse) => &[Direction::Reverse],
        None => &[Direction::Forward, Direction::Reverse],
    };
    let mut unmet = None;
    let mut hits = BTreeSet::new();
    for q in candidate_positions(cur, next, position) {
        for rule in rules {
            for d in dirs {
                let (l, r) = match d {
                    Direction::Forward => (&rule.lhs, &rule.rhs),
                    Direction::Reverse => (&rule.rhs, &rule.lhs),
                };
                match try_at(cur, next, &q, l, r, rule.condition.as_ref(), rigid, ctx, db, env) {
                    Attempt::Ok => {
                        hits.insert(q.clone());
                    }
                    Attempt::Unmet(c) => {
                        unmet.get_or_insert(c);
                    }
                    Attempt::NoFit => {}
                }
            }
        }
    }
    if hits.len() > 1 && position.is_none() && cur == next {
        return Err(StepError::AmbiguousWithoutPosition);
    }
    if !hits.is_empty() {
        return Ok(());
    }
    match unmet {
        Some(c) => Err(StepError::ConditionUnmet(c.to_string())),
        None => Err(StepError::NoMatchingPosition),
    }
}

/// Validates a single rewrite of `cur` into `next` by `rule`, with no
/// hypotheses beyond ground evaluation of the rule's condition.
pub fn rewrite_step(
    cur: &Term,
    next: &Term,
    rule: &RewriteRule,
    direction: Option<Direction>,
    position: Option<&[usize]>,
) -> Result<(), StepError> {
    let env = DefEnv::new();
    let db = RuleDb::empty();
    rewrite_with(cur, next, &[rule], direction, position, &BTreeSet::new(), &StepContext::default(), &db, &env)
}

fn fresh(base: &str, taken: &BTreeSet<String>) -> String {
    (0..).map(|i| format!("{base}{i}")).find(|v| !taken.contains(v)).unwrap()
}

struct Case {
    name: &'static str,
    subst: Subst,
    extra_hyps: Vec<Term>,
    ind_hyp: bool,
}

fn reject(case: &str, step: usize, reason: StepError) -> ProofOutcome {
    ProofOutcome::RejectedAt { case: case.to_string(), step, reason }
}

fn goal_hyp_condition(goal: &Goal) -> Option<Term> {
    conjoin(goal.hyps.clone())
}

/// Checks a proof script against the rules in `db`.
pub fn check_proof(script: &ProofScript, db: &RuleDb, env: &DefEnv) -> ProofOutcome {
    let goal = &script.goal;
    let vars = goal.free_vars();
    let (cases, rigid): (Vec<Case>, BTreeSet<String>) = match &script.method {
        Method::Equational => {
            (vec![Case { name: "chain", subst: Subst::new(), extra_hyps: vec![], ind_hyp: false }], BTreeSet::new())
        }
        Method::Induction { scheme, var, head } => {
            if !vars.contains(var) {
                return reject("base", 0, StepError::BadInduction(format!("`{var}` does not occur in the goal")));
            }
            let v = Term::var(var.clone());
            let (base, step, hyp) = match scheme {
                Scheme::List => {
                    let h = match head {
                        Some(h) if vars.contains(h) || h == var => {
                            return reject("step", 0, StepError::BadInduction(format!("`{h}` is not fresh")));
                        }
                        Some(h) => h.clone(),
                        None => fresh("x", &vars),
                    };
                    (Term::nil(), Term::app("cons", vec![Term::var(h), v.clone()]), "true-listp")
                }
                Scheme::Nat => (Term::int(0), Term::app("1+", vec![v.clone()]), "natp"),
            };
            (
                vec![
                    Case { name: "base", subst: [(var.clone(), base)].into(), extra_hyps: vec![], ind_hyp: false },
                    Case {
                        name: "step",
                        subst: [(var.clone(), step)].into(),
                        extra_hyps: vec![Term::app(hyp, vec![v])],
                        ind_hyp: true,
                    },
                ],
                [var.clone()].into(),
            )
        }
    };
    if script.cases.len() != cases.len() {
        return reject(
            cases[0].name,
            0,
            StepError::BadInduction(format!("expected {} case(s), found {}", cases.len(), script.cases.len())),
        );
    }
    for (case, chain) in cases.iter().zip(&script.cases) {
        let mut hyps: Vec<Term> = goal.hyps.iter().map(|h| h.subst(&case.subst)).collect();
        hyps.extend(case.extra_hyps.iter().cloned());
        let mut ctx = StepContext::from_hyps(&hyps, db);
        if case.ind_hyp {
            ctx.rigid = rigid.clone();
            ctx.ind_hyp = Some(RewriteRule {
                label: "ind-hyp".into(),
                lhs: goal.lhs.clone(),
                rhs: goal.rhs.clone(),
                condition: goal_hyp_condition(goal),
                source: RuleSource::Lemma,
            });
        }
        let start = goal.lhs.subst(&case.subst);
        let end = goal.rhs.subst(&case.subst);
        if chain.start != start {
            return reject(case.name, 0, StepError::ChainEndpointsWrong(format!("expected start {start}")));
        }
        let mut cur = &chain.start;
        for (i, step) in chain.steps.iter().enumerate() {
            if let Err(e) =
                check_step(cur, &step.term, &step.label, step.direction, step.position.as_deref(), &ctx, db, env)
            {
                return reject(case.name, i + 1, e);
            }
            cur = &step.term;
        }
        if *cur != end {
            return reject(case.name, chain.steps.len(), StepError::ChainEndpointsWrong(format!("expected end {end}")));
        }
    }
    ProofOutcome::Accepted
}

/// The rule contributed by an accepted proof. Induction adds the implicit
/// domain hypothesis on the induction variable.
pub fn lemma_rule(script: &ProofScript) -> RewriteRule {
    let mut cond = script.goal.hyps.clone();
    if let Method::Induction { scheme, var, .. } = &script.method {
        let p = match scheme {
            Scheme::List => "true-listp",
            Scheme::Nat => "natp",
        };
        let c = Term::app(p, vec![Term::var(var.clone())]);
        if !cond.contains(&c) {
            cond.push(c);
        }
    }
    RewriteRule {
        label: script.name.clone(),
        lhs: script.goal.lhs.clone(),
        rhs: script.goal.rhs.clone(),
        condition: conjoin(cond),
        source: RuleSource::Lemma,
    }
}

/// Checks `script` and, if accepted, adds it to `db` as a lemma.
pub fn check_and_record(script: &ProofScript, db: &mut RuleDb, env: &DefEnv) -> ProofOutcome {
    let out = check_proof(script, db, env);
    if out.accepted() {
        db.add_rule(lemma_rule(script));
    }
    out
}

#[cfg(test)]
mod tests;

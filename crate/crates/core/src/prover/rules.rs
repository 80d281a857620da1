use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::eval::{DefEnv, DefSource};
use crate::syntax::{parse_term, DefEquations, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "of", rename_all = "lowercase")]
pub enum RuleSource {
    Axiom,
    Definition(String),
    Lemma,
}

/// `lhs = rhs`, usable in either direction when `condition` holds.
#[derive(Debug, Clone, PartialEq)]
pub struct RewriteRule {
    pub label: String,
    pub lhs: Term,
    pub rhs: Term,
    pub condition: Option<Term>,
    pub source: RuleSource,
}

const AXIOMS: &[(&str, &str, &str)] = &[
    ("or-identity", "(or x nil)", "x"),
    ("or-null", "(or x t)", "t"),
    ("or-commutative", "(or x y)", "(or y x)"),
    ("or-associative", "(or x (or y z))", "(or (or x y) z)"),
    ("or-distributive", "(or x (and y z))", "(and (or x y) (or x z))"),
    ("implication", "(implies x y)", "(or (not x) y)"),
    ("or-demorgan", "(not (or x y))", "(and (not x) (not y))"),
    ("or-idempotent", "(or x x)", "x"),
    ("self-implication", "(implies x x)", "t"),
    ("double-negation", "(not (not x))", "x"),
    ("xor-def", "(xor x y)", "(and (or x y) (not (and x y)))"),
    ("nand-def", "(nand x y)", "(not (and x y))"),
    ("nor-def", "(nor x y)", "(not (or x y))"),
    ("fst-id", "(first (cons x xs))", "x"),
    ("rst-id", "(rest (cons x xs))", "xs"),
];

/// Conjunction of `terms`, right-nested; `None` when empty.
pub fn conjoin(terms: Vec<Term>) -> Option<Term> {
    let mut it = terms.into_iter().rev();
    let last = it.next()?;
    Some(it.fold(last, |acc, t| Term::app("and", vec![t, acc])))
}

/// Splits nested `and` into its conjuncts.
pub fn conjuncts(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::App(op, args) if op == "and" && args.len() == 2 => {
            conjuncts(&args[0], out);
            conjuncts(&args[1], out);
        }
        _ => out.push(t.clone()),
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuleDb {
    rules: Vec<RewriteRule>,
    by_label: BTreeMap<String, Vec<usize>>,
    bodies: BTreeMap<String, Vec<Term>>,
    nat_fns: BTreeSet<String>,
}

impl RuleDb {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The Boolean axioms, gate definitions and pair projections.
    pub fn with_axioms() -> Self {
        let mut db = Self::default();
        for (label, l, r) in AXIOMS {
            db.add_rule(RewriteRule {
                label: label.to_string(),
                lhs: parse_term(l).expect("axiom"),
                rhs: parse_term(r).expect("axiom"),
                condition: None,
                source: RuleSource::Axiom,
            });
        }
        db
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn add_rule(&mut self, rule: RewriteRule) {
        let i = self.rules.len();
        self.by_label.entry(rule.label.clone()).or_default().push(i);
        self.rules.push(rule);
    }

    /// One rule per equation, under both `label` and `name.label`.
    pub fn add_definition(&mut self, d: &DefEquations) {
        for e in &d.equations {
            let mut cond = Vec::new();
            if let Some(g) = &e.guard {
                cond.push(g.clone());
            }
            for p in &e.patterns {
                for v in p.nat_vars() {
                    cond.push(Term::app("natp", vec![Term::var(v)]));
                }
            }
            let condition = conjoin(cond);
            for label in [e.label.clone(), format!("{}.{}", d.name, e.label)] {
                self.add_rule(RewriteRule {
                    label,
                    lhs: e.lhs_term(&d.name),
                    rhs: e.rhs.clone(),
                    condition: condition.clone(),
                    source: RuleSource::Definition(d.name.clone()),
                });
            }
        }
        self.bodies.insert(d.name.clone(), d.equations.iter().map(|e| e.rhs.clone()).collect());
    }

    pub fn labels(&self) -> Vec<String> {
        self.by_label.keys().cloned().collect()
    }

    pub fn lookup(&self, label: &str) -> Vec<&RewriteRule> {
        self.by_label.get(label).map(|ix| ix.iter().map(|&i| &self.rules[i]).collect()).unwrap_or_default()
    }

    /// Unconditional definitional rules, used to close hypothesis sets.
    pub fn unconditional_definitions(&self) -> impl Iterator<Item = &RewriteRule> {
        let mut seen = BTreeSet::new();
        self.rules.iter().filter(move |r| {
            matches!(r.source, RuleSource::Definition(_))
                && r.condition.is_none()
                && seen.insert((r.lhs.clone(), r.rhs.clone()))
        })
    }

    /// Recomputes the set of operators whose every result is a natural.
    pub fn infer_naturals(&mut self, env: &DefEnv) {
        let mut bodies = self.bodies.clone();
        for name in env.names() {
            if let Some(DefSource::Body(b)) = env.source(name) {
                bodies.entry(name.to_string()).or_insert_with(|| vec![b.clone()]);
            }
        }
        let mut set: BTreeSet<String> = bodies.keys().cloned().collect();
        loop {
            let keep: BTreeSet<String> = set
                .iter()
                .filter(|f| bodies[*f].iter().all(|b| is_natural_expr(b, &set, &BTreeSet::new())))
                .cloned()
                .collect();
            if keep == set {
                break;
            }
            set = keep;
        }
        self.nat_fns = set;
    }

    pub fn natural_functions(&self) -> &BTreeSet<String> {
        &self.nat_fns
    }
}

/// Syntactic check that `t` always evaluates to a natural number, given the
/// natural-valued operators `fns` and variables `vars`.
pub fn is_natural_expr(t: &Term, fns: &BTreeSet<String>, vars: &BTreeSet<String>) -> bool {
    match t {
        Term::Int(n) => n.sign() != num_bigint::Sign::Minus,
        Term::Var(v) => vars.contains(v),
        Term::Sym(_) => false,
        Term::App(op, args) => match op.as_str() {
            "1+" | "+" | "*" | "max" | "min" => args.iter().all(|a| is_natural_expr(a, fns, vars)),
            "if" => args.len() == 3 && is_natural_expr(&args[1], fns, vars) && is_natural_expr(&args[2], fns, vars),
            _ => fns.contains(op),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, TopFormKind};

    #[test]
    fn axioms_parse() {
        let db = RuleDb::with_axioms();
        assert_eq!(db.lookup("or-identity").len(), 1);
        assert!(db.lookup("and-null").is_empty());
    }

    #[test]
    fn definitions_and_naturals() {
        let src = "(defequations len (xs) :sig (list) (len0 (len nil) = 0) (len1 (len (cons x xs)) = (1+ (len xs))))
                   (defequations prefix (n xs) :sig (nat list)
                     (pfx0 (prefix 0 xs) = nil) (pfx- (prefix n nil) = nil)
                     (pfx1 (prefix (1+ n) (cons x xs)) = (cons x (prefix n xs))))";
        let mut db = RuleDb::with_axioms();
        let mut env = DefEnv::new();
        for f in parse_program(src).unwrap() {
            if let TopFormKind::DefEquations(d) = f.kind {
                env.define_equations(&d).unwrap();
                db.add_definition(&d);
            }
        }
        db.infer_naturals(&env);
        assert!(db.natural_functions().contains("len"));
        assert!(!db.natural_functions().contains("prefix"));
        let r = db.lookup("prefix.pfx1")[0];
        assert_eq!(r.condition, Some(parse_term("(natp n)").unwrap()));
    }
}

//! Total, deterministic evaluator with optional step counting.
//!
//! Terms are compiled to a small IR with resolved locals, primitives and
//! definition ids before evaluation.

mod prims;
mod value;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::syntax::{DefEquations, Pattern, Term};

pub use prims::Prim;
pub use value::{Cell, Value};

pub const DEFAULT_FUEL: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
    #[error("`{name}` expects {expected} arguments, got {got}")]
    BadArity { name: String, expected: usize, got: usize },
    #[error("step limit of {0} exceeded")]
    StepLimitExceeded(u64),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StepCount {
    pub total: u64,
    pub per_operator: BTreeMap<String, u64>,
}

const IF: usize = prims::ALL.len();
const AND: usize = IF + 1;
const OR: usize = IF + 2;
const IMPLIES: usize = IF + 3;
const FIRST_DEF: usize = IF + 4;

#[derive(Debug, Clone)]
enum Expr {
    Local(usize),
    Const(Value),
    Prim1(Prim, Box<Expr>),
    Prim2(Prim, Box<(Expr, Expr)>),
    List(Vec<Expr>),
    If(Box<(Expr, Expr, Expr)>),
    And(Box<(Expr, Expr)>),
    Or(Box<(Expr, Expr)>),
    Implies(Box<(Expr, Expr)>),
    Call(usize, Vec<Expr>),
    Unknown(String),
}

#[derive(Debug, Clone)]
enum SlotPat {
    Var(usize),
    Int(BigInt),
    Nil,
    Cons(Box<SlotPat>, Box<SlotPat>),
    Succ(Box<SlotPat>),
}

#[derive(Debug, Clone)]
struct CompiledEq {
    patterns: Vec<SlotPat>,
    slots: usize,
    guard: Option<Expr>,
    rhs: Expr,
}

#[derive(Debug, Clone)]
enum Body {
    Expr(Expr),
    Equations(Vec<CompiledEq>),
}

/// How a definition was given; kept so that bodies can be relinked.
#[derive(Debug, Clone)]
pub enum DefSource {
    Body(Term),
    Equations(DefEquations),
}

#[derive(Debug, Clone)]
struct Def {
    name: String,
    params: Vec<String>,
    source: DefSource,
    body: Body,
    unresolved: BTreeSet<String>,
}

/// Definition environment: admitted operators plus the fixed primitive table.
#[derive(Debug, Clone)]
pub struct DefEnv {
    defs: Vec<Def>,
    index: HashMap<String, usize>,
    fuel: u64,
}

impl Default for DefEnv {
    fn default() -> Self {
        DefEnv::new()
    }
}

struct Scope<'a> {
    env: &'a DefEnv,
    locals: &'a [String],
    unresolved: BTreeSet<String>,
}

impl Scope<'_> {
    fn compile(&mut self, t: &Term) -> Result<Expr, EvalError> {
        Ok(match t {
            Term::Var(v) => match self.locals.iter().position(|l| l == v) {
                Some(i) => Expr::Local(i),
                None => return Err(EvalError::UnboundVariable(v.clone())),
            },
            Term::Int(n) => Expr::Const(Value::Int(n.clone())),
            Term::Sym(s) => Expr::Const(match s.as_str() {
                "nil" => Value::nil(),
                "t" => Value::t(),
                _ => Value::sym(s),
            }),
            Term::App(op, args) => {
                let mut cargs = args.iter().map(|a| self.compile(a)).collect::<Result<Vec<_>, _>>()?;
                let got = cargs.len();
                let pair = |mut v: Vec<Expr>| {
                    let b = v.pop().unwrap();
                    let a = v.pop().unwrap();
                    Box::new((a, b))
                };
                let check = |expected: usize| {
                    if got == expected {
                        Ok(())
                    } else {
                        Err(EvalError::BadArity { name: op.clone(), expected, got })
                    }
                };
                match op.as_str() {
                    "if" => {
                        check(3)?;
                        let c = cargs.pop().unwrap();
                        let b = cargs.pop().unwrap();
                        let a = cargs.pop().unwrap();
                        Expr::If(Box::new((a, b, c)))
                    }
                    "and" => {
                        check(2)?;
                        Expr::And(pair(cargs))
                    }
                    "or" => {
                        check(2)?;
                        Expr::Or(pair(cargs))
                    }
                    "implies" => {
                        check(2)?;
                        Expr::Implies(pair(cargs))
                    }
                    _ => {
                        if let Some(p) = Prim::from_name(op) {
                            match prims::arity(p) {
                                None => Expr::List(cargs),
                                Some(1) => {
                                    check(1)?;
                                    Expr::Prim1(p, Box::new(cargs.pop().unwrap()))
                                }
                                Some(_) => {
                                    check(2)?;
                                    Expr::Prim2(p, pair(cargs))
                                }
                            }
                        } else if let Some(&id) = self.env.index.get(op) {
                            check(self.env.defs[id].params.len())?;
                            Expr::Call(id, cargs)
                        } else {
                            self.unresolved.insert(op.clone());
                            Expr::Unknown(op.clone())
                        }
                    }
                }
            }
        })
    }
}

fn slot_pattern(p: &Pattern, vars: &mut Vec<String>) -> SlotPat {
    match p {
        Pattern::Var(v) => {
            vars.push(v.clone());
            SlotPat::Var(vars.len() - 1)
        }
        Pattern::Int(n) => SlotPat::Int(n.clone()),
        Pattern::Nil => SlotPat::Nil,
        Pattern::Cons(h, t) => {
            let h = slot_pattern(h, vars);
            let t = slot_pattern(t, vars);
            SlotPat::Cons(Box::new(h), Box::new(t))
        }
        Pattern::Succ(inner) => SlotPat::Succ(Box::new(slot_pattern(inner, vars))),
    }
}

fn match_slot(p: &SlotPat, v: &Value, slots: &mut [Value]) -> bool {
    match p {
        SlotPat::Var(i) => {
            slots[*i] = v.clone();
            true
        }
        SlotPat::Int(n) => v.as_int() == Some(n),
        SlotPat::Nil => v.is_nil(),
        SlotPat::Cons(h, t) => match v {
            Value::Pair(c) => match_slot(h, &c.head, slots) && match_slot(t, &c.tail, slots),
            _ => false,
        },
        SlotPat::Succ(inner) => match v {
            Value::Int(n) if n.is_positive() => match_slot(inner, &Value::Int(n - BigInt::one()), slots),
            _ => false,
        },
    }
}

impl DefEnv {
    pub fn new() -> Self {
        DefEnv { defs: Vec::new(), index: HashMap::new(), fuel: DEFAULT_FUEL }
    }

    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel = fuel;
        self
    }

    pub fn set_fuel(&mut self, fuel: u64) {
        self.fuel = fuel;
    }

    pub fn fuel(&self) -> u64 {
        self.fuel
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.index.get(name).map(|&i| self.defs[i].params.len())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.iter().map(|d| d.name.as_str())
    }

    pub fn params(&self, name: &str) -> Option<&[String]> {
        self.index.get(name).map(|&i| self.defs[i].params.as_slice())
    }

    pub fn source(&self, name: &str) -> Option<&DefSource> {
        self.index.get(name).map(|&i| &self.defs[i].source)
    }

    /// Operators referenced by a definition that are not (yet) defined.
    pub fn unresolved(&self, name: &str) -> Option<&BTreeSet<String>> {
        self.index.get(name).map(|&i| &self.defs[i].unresolved)
    }

    /// Adds or replaces a definition with a single body.
    pub fn define(&mut self, name: &str, params: Vec<String>, body: Term) -> Result<(), EvalError> {
        self.insert(name, params, DefSource::Body(body))
    }

    /// Adds a definition evaluated by first-match equation matching; unmatched inputs yield `nil`.
    pub fn define_equations(&mut self, d: &DefEquations) -> Result<(), EvalError> {
        self.insert(&d.name, d.params.clone(), DefSource::Equations(d.clone()))
    }

    fn insert(&mut self, name: &str, params: Vec<String>, source: DefSource) -> Result<(), EvalError> {
        let existing = self.index.get(name).copied();
        let id = existing.unwrap_or_else(|| {
            self.defs.push(Def {
                name: name.to_string(),
                params: Vec::new(),
                source: source.clone(),
                body: Body::Expr(Expr::Const(Value::nil())),
                unresolved: BTreeSet::new(),
            });
            self.index.insert(name.to_string(), self.defs.len() - 1);
            self.defs.len() - 1
        });
        let old_params = std::mem::replace(&mut self.defs[id].params, params);
        let old_source = std::mem::replace(&mut self.defs[id].source, source);
        if let Err(e) = self.relink(id) {
            if existing.is_none() {
                self.defs.pop();
                self.index.remove(name);
            } else {
                self.defs[id].params = old_params;
                self.defs[id].source = old_source;
                let _ = self.relink(id);
            }
            return Err(e);
        }
        let waiting: Vec<usize> =
            (0..self.defs.len()).filter(|&i| i != id && self.defs[i].unresolved.contains(name)).collect();
        for i in waiting {
            self.relink(i)?;
        }
        Ok(())
    }

    fn relink(&mut self, id: usize) -> Result<(), EvalError> {
        let def = &self.defs[id];
        let (body, unresolved) = match &def.source {
            DefSource::Body(t) => {
                let mut scope = Scope { env: self, locals: &def.params, unresolved: BTreeSet::new() };
                let e = scope.compile(t)?;
                (Body::Expr(e), scope.unresolved)
            }
            DefSource::Equations(d) => {
                let mut unresolved = BTreeSet::new();
                let mut eqs = Vec::new();
                for eq in &d.equations {
                    let mut vars = Vec::new();
                    let patterns = eq.patterns.iter().map(|p| slot_pattern(p, &mut vars)).collect();
                    let mut scope = Scope { env: self, locals: &vars, unresolved: BTreeSet::new() };
                    let guard = eq.guard.as_ref().map(|g| scope.compile(g)).transpose()?;
                    let rhs = scope.compile(&eq.rhs)?;
                    unresolved.extend(scope.unresolved);
                    eqs.push(CompiledEq { patterns, slots: vars.len(), guard, rhs });
                }
                (Body::Equations(eqs), unresolved)
            }
        };
        let def = &mut self.defs[id];
        def.body = body;
        def.unresolved = unresolved;
        Ok(())
    }

    /// Compiles a term once for repeated evaluation with the given variable order.
    pub fn prepare(&self, t: &Term, vars: &[String]) -> Result<Prepared, EvalError> {
        let mut scope = Scope { env: self, locals: vars, unresolved: BTreeSet::new() };
        let expr = scope.compile(t)?;
        if let Some(op) = scope.unresolved.into_iter().next() {
            return Err(EvalError::UnknownOperator(op));
        }
        Ok(Prepared { expr, arity: vars.len() })
    }

    pub fn run(&self, p: &Prepared, args: &[Value]) -> Result<Value, EvalError> {
        assert_eq!(args.len(), p.arity, "prepared term arity");
        Machine::new(self, false).eval(&p.expr, args)
    }

    pub fn run_counting(&self, p: &Prepared, args: &[Value]) -> Result<(Value, StepCount), EvalError> {
        assert_eq!(args.len(), p.arity, "prepared term arity");
        let mut m = Machine::new(self, true);
        let v = m.eval(&p.expr, args)?;
        Ok((v, m.step_count()))
    }

    /// Applies a defined operator to argument values.
    pub fn call(&self, name: &str, args: Vec<Value>) -> Result<Value, EvalError> {
        let id = self.lookup_call(name, args.len())?;
        Machine::new(self, false).call(id, args)
    }

    pub fn call_counting(&self, name: &str, args: Vec<Value>) -> Result<(Value, StepCount), EvalError> {
        let id = self.lookup_call(name, args.len())?;
        let mut m = Machine::new(self, true);
        m.tick(FIRST_DEF + id)?;
        let v = m.call(id, args)?;
        Ok((v, m.step_count()))
    }

    fn lookup_call(&self, name: &str, got: usize) -> Result<usize, EvalError> {
        let &id = self.index.get(name).ok_or_else(|| EvalError::UnknownOperator(name.to_string()))?;
        let expected = self.defs[id].params.len();
        if expected != got {
            return Err(EvalError::BadArity { name: name.to_string(), expected, got });
        }
        Ok(id)
    }

    fn op_name(&self, op: usize) -> &str {
        match op {
            IF => "if",
            AND => "and",
            OR => "or",
            IMPLIES => "implies",
            i if i < IF => prims::ALL[i].name(),
            i => &self.defs[i - FIRST_DEF].name,
        }
    }
}

/// A term compiled against a [`DefEnv`].
#[derive(Debug, Clone)]
pub struct Prepared {
    expr: Expr,
    arity: usize,
}

struct Machine<'a> {
    env: &'a DefEnv,
    steps: u64,
    counts: Option<Vec<u64>>,
}

impl<'a> Machine<'a> {
    fn new(env: &'a DefEnv, counting: bool) -> Self {
        Machine { env, steps: 0, counts: counting.then(|| vec![0; FIRST_DEF + env.defs.len()]) }
    }

    fn step_count(&self) -> StepCount {
        let mut per_operator = BTreeMap::new();
        if let Some(counts) = &self.counts {
            for (op, &n) in counts.iter().enumerate() {
                if n > 0 {
                    *per_operator.entry(self.env.op_name(op).to_string()).or_insert(0) += n;
                }
            }
        }
        StepCount { total: self.steps, per_operator }
    }

    #[inline]
    fn tick(&mut self, op: usize) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.env.fuel {
            return Err(EvalError::StepLimitExceeded(self.env.fuel));
        }
        if let Some(c) = &mut self.counts {
            c[op] += 1;
        }
        Ok(())
    }

    fn eval(&mut self, e: &Expr, locals: &[Value]) -> Result<Value, EvalError> {
        match e {
            Expr::Local(i) => Ok(locals[*i].clone()),
            Expr::Const(v) => Ok(v.clone()),
            Expr::Prim1(p, a) => {
                let a = self.eval(a, locals)?;
                self.tick(p.index())?;
                Ok(prims::apply1(*p, a))
            }
            Expr::Prim2(p, ab) => {
                let a = self.eval(&ab.0, locals)?;
                let b = self.eval(&ab.1, locals)?;
                self.tick(p.index())?;
                Ok(prims::apply2(*p, a, b))
            }
            Expr::List(items) => {
                let vals = items.iter().map(|x| self.eval(x, locals)).collect::<Result<Vec<_>, _>>()?;
                self.tick(Prim::List.index())?;
                Ok(Value::list(vals))
            }
            Expr::If(abc) => {
                self.tick(IF)?;
                if self.eval(&abc.0, locals)?.is_true() {
                    self.eval(&abc.1, locals)
                } else {
                    self.eval(&abc.2, locals)
                }
            }
            Expr::And(ab) => {
                self.tick(AND)?;
                if self.eval(&ab.0, locals)?.is_nil() {
                    return Ok(Value::nil());
                }
                Ok(Value::bool(self.eval(&ab.1, locals)?.is_true()))
            }
            Expr::Or(ab) => {
                self.tick(OR)?;
                if self.eval(&ab.0, locals)?.is_true() {
                    return Ok(Value::t());
                }
                Ok(Value::bool(self.eval(&ab.1, locals)?.is_true()))
            }
            Expr::Implies(ab) => {
                self.tick(IMPLIES)?;
                if self.eval(&ab.0, locals)?.is_nil() {
                    return Ok(Value::t());
                }
                Ok(Value::bool(self.eval(&ab.1, locals)?.is_true()))
            }
            Expr::Call(id, args) => {
                let vals = args.iter().map(|x| self.eval(x, locals)).collect::<Result<Vec<_>, _>>()?;
                self.tick(FIRST_DEF + id)?;
                let id = *id;
                stacker::maybe_grow(128 * 1024, 4 * 1024 * 1024, || self.call(id, vals))
            }
            Expr::Unknown(op) => Err(EvalError::UnknownOperator(op.clone())),
        }
    }

    fn call(&mut self, id: usize, args: Vec<Value>) -> Result<Value, EvalError> {
        let env = self.env;
        match &env.defs[id].body {
            Body::Expr(e) => self.eval(e, &args),
            Body::Equations(eqs) => {
                for eq in eqs {
                    let mut slots = vec![Value::nil(); eq.slots];
                    if !eq.patterns.iter().zip(&args).all(|(p, v)| match_slot(p, v, &mut slots)) {
                        continue;
                    }
                    if let Some(g) = &eq.guard {
                        if self.eval(g, &slots)?.is_nil() {
                            continue;
                        }
                    }
                    return self.eval(&eq.rhs, &slots);
                }
                Ok(Value::nil())
            }
        }
    }
}

fn bound_vars(bindings: &BTreeMap<String, Value>) -> (Vec<String>, Vec<Value>) {
    bindings.iter().map(|(k, v)| (k.clone(), v.clone())).unzip()
}

pub fn eval(t: &Term, bindings: &BTreeMap<String, Value>, defs: &DefEnv) -> Result<Value, EvalError> {
    let (vars, vals) = bound_vars(bindings);
    let p = defs.prepare(t, &vars)?;
    defs.run(&p, &vals)
}

pub fn eval_counting(
    t: &Term,
    bindings: &BTreeMap<String, Value>,
    defs: &DefEnv,
) -> Result<(Value, StepCount), EvalError> {
    let (vars, vals) = bound_vars(bindings);
    let p = defs.prepare(t, &vars)?;
    defs.run_counting(&p, &vals)
}

/// Evaluates a closed term.
pub fn eval_ground(t: &Term, defs: &DefEnv) -> Result<Value, EvalError> {
    eval(t, &BTreeMap::new(), defs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_term, TopFormKind};

    fn ev(src: &str, defs: &DefEnv) -> Value {
        eval(&parse_term(src).unwrap(), &BTreeMap::new(), defs).unwrap()
    }

    fn append_env() -> DefEnv {
        let mut env = DefEnv::new();
        env.define(
            "append",
            vec!["xs".into(), "ys".into()],
            parse_term("(if (consp xs) (cons (first xs) (append (rest xs) ys)) ys)").unwrap(),
        )
        .unwrap();
        env
    }

    #[test]
    fn append_values() {
        let env = append_env();
        assert_eq!(ev("(append '(1 2) '(3))", &env).to_string(), "(1 2 3)");
        assert_eq!(ev("(append 5 '(3))", &env).to_string(), "(3)");
    }

    #[test]
    fn cost_of_first_cons() {
        let (v, c) =
            eval_counting(&parse_term("(first (cons 1 nil))").unwrap(), &BTreeMap::new(), &DefEnv::new()).unwrap();
        assert_eq!(v, Value::from(1));
        assert_eq!(c.total, 2);
        assert_eq!(c.per_operator.get("cons"), Some(&1));
        assert_eq!(c.per_operator.get("first"), Some(&1));
    }

    #[test]
    fn if_counts_taken_branch_only() {
        let (_, c) = eval_counting(
            &parse_term("(if t (cons 1 nil) (first (first (first nil))))").unwrap(),
            &BTreeMap::new(),
            &DefEnv::new(),
        )
        .unwrap();
        assert_eq!(c.total, 2);
    }

    #[test]
    fn equations_first_match() {
        let forms = parse_program(
            "(defequations prefix (n xs)
               (pfx0 (prefix 0 xs) = nil)
               (pfx- (prefix (1+ n) nil) = nil)
               (pfx1 (prefix (1+ n) (cons x xs)) = (cons x (prefix n xs))))",
        )
        .unwrap();
        let TopFormKind::DefEquations(d) = &forms[0].kind else { panic!() };
        let mut env = DefEnv::new();
        env.define_equations(d).unwrap();
        assert_eq!(ev("(prefix 2 '(7 8 9))", &env).to_string(), "(7 8)");
        assert!(ev("(prefix 'a '(7 8 9))", &env).is_nil());
    }

    #[test]
    fn fuel_and_unknowns() {
        let mut env = DefEnv::new().with_fuel(1000);
        env.define("loop", vec!["n".into()], parse_term("(loop (1+ n))").unwrap()).unwrap();
        let e = eval(&parse_term("(loop 0)").unwrap(), &BTreeMap::new(), &env).unwrap_err();
        assert_eq!(e, EvalError::StepLimitExceeded(1000));
        let e = eval(&parse_term("(nope 1)").unwrap(), &BTreeMap::new(), &env).unwrap_err();
        assert_eq!(e, EvalError::UnknownOperator("nope".into()));
        let e = eval(&parse_term("(cons x 1)").unwrap(), &BTreeMap::new(), &env).unwrap_err();
        assert_eq!(e, EvalError::UnboundVariable("x".into()));
    }

    #[test]
    fn forward_reference_is_relinked() {
        let mut env = DefEnv::new();
        env.define("f", vec!["x".into()], parse_term("(g x)").unwrap()).unwrap();
        assert!(matches!(env.call("f", vec![Value::from(1)]), Err(EvalError::UnknownOperator(_))));
        env.define("g", vec!["x".into()], parse_term("(1+ x)").unwrap()).unwrap();
        assert_eq!(env.call("f", vec![Value::from(1)]).unwrap(), Value::from(2));
    }

    #[test]
    fn deep_recursion() {
        let mut env = DefEnv::new();
        env.define("len", vec!["xs".into()], parse_term("(if (consp xs) (1+ (len (rest xs))) 0)").unwrap()).unwrap();
        let big = Value::list((0..200_000i64).map(Value::from).collect::<Vec<_>>());
        assert_eq!(env.call("len", vec![big]).unwrap(), Value::from(200_000));
    }
}

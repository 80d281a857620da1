use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::eval::Value;
use crate::syntax::Pattern;

pub type PSubst = BTreeMap<String, Pattern>;

/// Renames every pattern variable by appending `suffix`.
pub fn rename(p: &Pattern, suffix: &str) -> Pattern {
    match p {
        Pattern::Var(v) => Pattern::Var(format!("{v}{suffix}")),
        Pattern::Cons(h, t) => Pattern::Cons(Box::new(rename(h, suffix)), Box::new(rename(t, suffix))),
        Pattern::Succ(q) => Pattern::Succ(Box::new(rename(q, suffix))),
        other => other.clone(),
    }
}

fn walk<'a>(mut p: &'a Pattern, s: &'a PSubst) -> &'a Pattern {
    while let Pattern::Var(v) = p {
        match s.get(v) {
            Some(q) => p = q,
            None => break,
        }
    }
    p
}

fn occurs(v: &str, p: &Pattern, s: &PSubst) -> bool {
    match walk(p, s) {
        Pattern::Var(w) => w == v,
        Pattern::Cons(h, t) => occurs(v, h, s) || occurs(v, t, s),
        Pattern::Succ(q) => occurs(v, q, s),
        _ => false,
    }
}

pub fn unify(a: &Pattern, b: &Pattern, s: &mut PSubst) -> bool {
    let a = walk(a, s).clone();
    let b = walk(b, s).clone();
    match (&a, &b) {
        (Pattern::Var(x), Pattern::Var(y)) if x == y => true,
        (Pattern::Var(x), t) | (t, Pattern::Var(x)) => {
            if occurs(x, t, s) {
                return false;
            }
            s.insert(x.clone(), t.clone());
            true
        }
        (Pattern::Int(m), Pattern::Int(n)) => m == n,
        (Pattern::Int(m), Pattern::Succ(q)) | (Pattern::Succ(q), Pattern::Int(m)) => {
            m.is_positive() && unify(&Pattern::Int(m - BigInt::one()), q, s)
        }
        (Pattern::Nil, Pattern::Nil) => true,
        (Pattern::Cons(h1, t1), Pattern::Cons(h2, t2)) => unify(h1, h2, s) && unify(t1, t2, s),
        (Pattern::Succ(p), Pattern::Succ(q)) => unify(p, q, s),
        _ => false,
    }
}

/// Applies `s` fully, folding `(1+ k)` into the literal `k+1`.
pub fn resolve(p: &Pattern, s: &PSubst) -> Pattern {
    match walk(p, s) {
        Pattern::Var(v) => Pattern::Var(v.clone()),
        Pattern::Cons(h, t) => Pattern::Cons(Box::new(resolve(h, s)), Box::new(resolve(t, s))),
        Pattern::Succ(q) => match resolve(q, s) {
            Pattern::Int(n) => Pattern::Int(n + 1),
            other => Pattern::Succ(Box::new(other)),
        },
        other => other.clone(),
    }
}

/// Unifies two pattern vectors; the second is renamed apart with a `'` suffix.
pub fn unify_vectors(a: &[Pattern], b: &[Pattern]) -> Option<(PSubst, Vec<Pattern>)> {
    let mut s = PSubst::new();
    let b: Vec<Pattern> = b.iter().map(|p| rename(p, "'")).collect();
    for (x, y) in a.iter().zip(&b) {
        if !unify(x, y, &mut s) {
            return None;
        }
    }
    let instance = a.iter().map(|p| resolve(p, &s)).collect();
    Some((s, instance))
}

/// Value of a pattern with variables supplied by `vars`.
pub fn pattern_value(p: &Pattern, vars: &mut dyn FnMut(&str, bool) -> Value) -> Value {
    fn go(p: &Pattern, under_succ: bool, vars: &mut dyn FnMut(&str, bool) -> Value) -> Value {
        match p {
            Pattern::Var(v) => vars(v, under_succ),
            Pattern::Int(n) => Value::Int(n.clone()),
            Pattern::Nil => Value::nil(),
            Pattern::Cons(h, t) => Value::cons(go(h, false, vars), go(t, false, vars)),
            Pattern::Succ(q) => {
                let inner = go(q, true, vars);
                let n = inner.as_int().cloned().unwrap_or_else(BigInt::zero);
                Value::Int(n + 1)
            }
        }
    }
    go(p, false, vars)
}

/// Matches a value against a pattern, extending `out` with the bindings.
pub fn match_value(p: &Pattern, v: &Value, out: &mut BTreeMap<String, Value>) -> bool {
    match p {
        Pattern::Var(x) => {
            out.insert(x.clone(), v.clone());
            true
        }
        Pattern::Int(n) => v.as_int() == Some(n),
        Pattern::Nil => v.is_nil(),
        Pattern::Cons(h, t) => match v.as_pair() {
            Some((a, b)) => match_value(h, a, out) && match_value(t, b, out),
            None => false,
        },
        Pattern::Succ(q) => match v.as_int() {
            Some(n) if n.is_positive() => match_value(q, &Value::Int(n - BigInt::one()), out),
            _ => false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(v: &str) -> Pattern {
        Pattern::Var(v.into())
    }

    fn cons(a: Pattern, b: Pattern) -> Pattern {
        Pattern::Cons(Box::new(a), Box::new(b))
    }

    #[test]
    fn disjoint_constructors() {
        assert!(unify_vectors(&[Pattern::Nil], &[cons(var("x"), var("xs"))]).is_none());
        assert!(unify_vectors(&[Pattern::Int(0.into())], &[Pattern::Succ(Box::new(var("n")))]).is_none());
    }

    #[test]
    fn literal_against_successor() {
        let (_, inst) = unify_vectors(&[Pattern::Int(3.into())], &[Pattern::Succ(Box::new(var("n")))]).unwrap();
        assert_eq!(inst, vec![Pattern::Int(3.into())]);
        let (s, inst) = unify_vectors(&[var("n")], &[Pattern::Succ(Box::new(Pattern::Int(1.into())))]).unwrap();
        assert_eq!(inst, vec![Pattern::Int(2.into())]);
        assert!(s.contains_key("n"));
    }

    #[test]
    fn matching_values() {
        let p = cons(var("x"), Pattern::Succ(Box::new(var("n"))));
        let mut b = BTreeMap::new();
        assert!(match_value(&p, &Value::cons(Value::sym("a"), Value::from(4)), &mut b));
        assert_eq!(b["n"], Value::from(3));
        assert!(!match_value(&p, &Value::cons(Value::sym("a"), Value::from(0)), &mut BTreeMap::new()));
    }
}

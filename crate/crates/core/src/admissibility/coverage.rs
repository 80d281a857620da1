//! Pattern-matrix exhaustiveness over the `nat`, `list` and `any` domains.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::eval::Value;
use crate::syntax::{Domain, Pattern};

#[derive(Clone, Copy)]
enum Ctor {
    Zero,
    Succ,
    Nil,
    Cons,
}

fn wild() -> Pattern {
    Pattern::Var("_".into())
}

fn specialize(rows: &[Vec<Pattern>], c: Ctor) -> Vec<Vec<Pattern>> {
    let mut out = Vec::new();
    for row in rows {
        let rest = &row[1..];
        let head: Option<Vec<Pattern>> = match (c, &row[0]) {
            (Ctor::Zero | Ctor::Nil, Pattern::Var(_)) => Some(vec![]),
            (Ctor::Succ, Pattern::Var(_)) => Some(vec![wild()]),
            (Ctor::Cons, Pattern::Var(_)) => Some(vec![wild(), wild()]),
            (Ctor::Zero, Pattern::Int(n)) if n.is_zero() => Some(vec![]),
            (Ctor::Succ, Pattern::Int(n)) if n.is_positive() => Some(vec![Pattern::Int(n - BigInt::one())]),
            (Ctor::Succ, Pattern::Succ(p)) => Some(vec![(**p).clone()]),
            (Ctor::Nil, Pattern::Nil) => Some(vec![]),
            (Ctor::Cons, Pattern::Cons(h, t)) => Some(vec![(**h).clone(), (**t).clone()]),
            _ => None,
        };
        if let Some(mut h) = head {
            h.extend_from_slice(rest);
            out.push(h);
        }
    }
    out
}

fn default_value(d: Domain) -> Value {
    match d {
        Domain::Nat => Value::from(0),
        Domain::List | Domain::Any => Value::nil(),
    }
}

/// A value vector matched by no row, or `None` if the rows cover the domain product.
pub fn uncovered(rows: &[Vec<Pattern>], doms: &[Domain]) -> Option<Vec<Value>> {
    let Some((&d, rest)) = doms.split_first() else {
        return if rows.is_empty() { Some(vec![]) } else { None };
    };
    if rows.is_empty() {
        return Some(doms.iter().map(|&d| default_value(d)).collect());
    }
    if rows.iter().all(|r| matches!(r[0], Pattern::Var(_))) {
        let tails: Vec<Vec<Pattern>> = rows.iter().map(|r| r[1..].to_vec()).collect();
        return uncovered(&tails, rest).map(|w| {
            let mut out = vec![default_value(d)];
            out.extend(w);
            out
        });
    }
    let ctors: &[(Ctor, &[Domain])] = match d {
        Domain::Nat => &[(Ctor::Zero, &[]), (Ctor::Succ, &[Domain::Nat])],
        Domain::List => &[(Ctor::Nil, &[]), (Ctor::Cons, &[Domain::Any, Domain::List])],
        Domain::Any => {
            // Symbols other than nil are matched only by variables.
            let default: Vec<Vec<Pattern>> =
                rows.iter().filter(|r| matches!(r[0], Pattern::Var(_))).map(|r| r[1..].to_vec()).collect();
            return uncovered(&default, rest).map(|w| {
                let mut out = vec![Value::sym("a")];
                out.extend(w);
                out
            });
        }
    };
    for &(c, sub) in ctors {
        let spec = specialize(rows, c);
        let mut doms2 = sub.to_vec();
        doms2.extend_from_slice(rest);
        if let Some(mut w) = uncovered(&spec, &doms2) {
            let tail = w.split_off(sub.len());
            let v = match c {
                Ctor::Zero => Value::from(0),
                Ctor::Succ => Value::Int(w[0].as_int().cloned().unwrap_or_default() + 1),
                Ctor::Nil => Value::nil(),
                Ctor::Cons => Value::cons(w[0].clone(), w[1].clone()),
            };
            let mut out = vec![v];
            out.extend(tail);
            return Some(out);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;
    use crate::syntax::TopFormKind;

    fn rows(src: &str) -> Vec<Vec<Pattern>> {
        let TopFormKind::DefEquations(d) = parse_program(src).unwrap().remove(0).kind else { panic!() };
        d.equations.into_iter().map(|e| e.patterns).collect()
    }

    #[test]
    fn prefix_is_covered() {
        let r = rows(
            "(defequations prefix (n xs)
               (pfx0 (prefix 0 xs) = nil)
               (pfx- (prefix n nil) = nil)
               (pfx1 (prefix (1+ n) (cons x xs)) = (cons x (prefix n xs))))",
        );
        assert_eq!(uncovered(&r, &[Domain::Nat, Domain::List]), None);
    }

    #[test]
    fn missing_nil_case() {
        let r = rows("(defequations append (xs ys) (app1 (append (cons x xs) ys) = (cons x (append xs ys))))");
        let w = uncovered(&r, &[Domain::List, Domain::List]).unwrap();
        assert!(w[0].is_nil());
    }

    #[test]
    fn literals_cover_a_prefix_of_nat() {
        let r = rows("(defequations f (n) (a (f 0) = 1) (b (f 1) = 1) (c (f (1+ (1+ (1+ n)))) = 2))");
        assert_eq!(uncovered(&r, &[Domain::Nat]), Some(vec![Value::from(2)]));
    }

    #[test]
    fn any_needs_a_variable() {
        let r = rows("(defequations g (x) (a (g nil) = 1) (b (g (cons y ys)) = 2))");
        assert_eq!(uncovered(&r, &[Domain::Any]), Some(vec![Value::sym("a")]));
        assert_eq!(uncovered(&r, &[Domain::List]), None);
    }
}

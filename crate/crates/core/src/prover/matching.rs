use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::Term;

pub type Subst = BTreeMap<String, Term>;

/// First-order matching: `σ(p) = t`. Returns `None` when no substitution exists.
pub fn match_term(p: &Term, t: &Term) -> Option<Subst> {
    let mut s = Subst::new();
    match_into(p, t, &BTreeSet::new(), &mut s).then_some(s)
}

/// Extends `s` so that `σ(p) = t`; variables in `rigid` match only themselves.
pub fn match_into(p: &Term, t: &Term, rigid: &BTreeSet<String>, s: &mut Subst) -> bool {
    match (p, t) {
        (Term::Var(v), _) if rigid.contains(v) => t == p,
        (Term::Var(v), _) => match s.get(v) {
            Some(bound) => bound == t,
            None => {
                s.insert(v.clone(), t.clone());
                true
            }
        },
        (Term::Int(a), Term::Int(b)) => a == b,
        (Term::Sym(a), Term::Sym(b)) => a == b,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_into(x, y, rigid, s))
        }
        _ => false,
    }
}

/// Deepest path `q` such that `a` and `b` agree everywhere outside `q`, or
/// `None` when the terms are equal.
pub fn divergence(a: &Term, b: &Term) -> Option<Vec<usize>> {
    if a == b {
        return None;
    }
    let mut path = Vec::new();
    let (mut x, mut y) = (a, b);
    loop {
        match (x, y) {
            (Term::App(f, xs), Term::App(g, ys)) if f == g && xs.len() == ys.len() => {
                let diff: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] != ys[i]).collect();
                if diff.len() != 1 {
                    return Some(path);
                }
                path.push(diff[0]);
                x = &xs[diff[0]];
                y = &ys[diff[0]];
            }
            _ => return Some(path),
        }
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use super::prims::primitive_arity;
use super::reader::{read_one, Sexp, SexpKind};
use super::{ErrorCode, SyntaxError};

/// Abstract syntax of the mini-language. Boolean formulas use the same
/// representation (`and`, `or`, `not`, `implies`, `t`, `nil`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Int(BigInt),
    /// Symbol literal; `t` and `nil` are the boolean constants.
    Sym(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn int(n: impl Into<BigInt>) -> Term {
        Term::Int(n.into())
    }

    pub fn sym(name: impl Into<String>) -> Term {
        Term::Sym(name.into())
    }

    pub fn nil() -> Term {
        Term::Sym("nil".into())
    }

    pub fn t() -> Term {
        Term::Sym("t".into())
    }

    pub fn app(op: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(op.into(), args)
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Term::Sym(s) if s == "nil")
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Int(_) | Term::Sym(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Int(_) | Term::Sym(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Every operator applied anywhere in the term.
    pub fn operators(&self) -> BTreeSet<String> {
        fn go(t: &Term, out: &mut BTreeSet<String>) {
            if let Term::App(op, args) = t {
                out.insert(op.clone());
                args.iter().for_each(|a| go(a, out));
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    /// Simultaneous substitution of variables; unmapped variables are kept.
    pub fn subst(&self, map: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Int(_) | Term::Sym(_) => self.clone(),
            Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| a.subst(map)).collect()),
        }
    }

    /// Subterm at a path of 0-based argument indices.
    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        let mut cur = self;
        for &i in path {
            match cur {
                Term::App(_, args) => cur = args.get(i)?,
                _ => return None,
            }
        }
        Some(cur)
    }

    /// Copy of `self` with the subterm at `path` replaced. The path must exist.
    pub fn replace_at(&self, path: &[usize], new: Term) -> Term {
        match path.split_first() {
            None => new,
            Some((&i, rest)) => match self {
                Term::App(op, args) => {
                    let mut args = args.clone();
                    args[i] = args[i].replace_at(rest, new);
                    Term::App(op.clone(), args)
                }
                _ => panic!("replace_at: path does not exist"),
            },
        }
    }

    /// All positions in pre-order (leftmost-outermost first).
    pub fn positions(&self) -> Vec<Vec<usize>> {
        fn go(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(path.clone());
            if let Term::App(_, args) = t {
                for (i, a) in args.iter().enumerate() {
                    path.push(i);
                    go(a, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Int(n) => write!(f, "{n}"),
            Term::Sym(s) if s == "t" || s == "nil" => f.write_str(s),
            Term::Sym(s) => write!(f, "'{s}"),
            Term::App(op, args) => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl serde::Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn print_term(t: &Term) -> String {
    t.to_string()
}

/// Parses the single expression in `text` as a term.
pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    term_from_sexp(&read_one(text)?)
}

pub(crate) fn term_from_sexp(s: &Sexp) -> Result<Term, SyntaxError> {
    match &s.kind {
        SexpKind::Int(n) => Ok(Term::Int(n.clone())),
        SexpKind::Ident(name) => Ok(match name.as_str() {
            "t" | "nil" => Term::Sym(name.clone()),
            _ => Term::Var(name.clone()),
        }),
        SexpKind::Quote(inner) => quoted_datum(inner),
        SexpKind::List(items) => {
            let Some((head, rest)) = items.split_first() else {
                return Ok(Term::nil());
            };
            let Some(op) = head.as_ident() else {
                return Err(SyntaxError::new(
                    ErrorCode::UnexpectedToken,
                    "operator position must hold an identifier",
                    head.loc,
                ));
            };
            if matches!(op, "t" | "nil") {
                return Err(SyntaxError::new(
                    ErrorCode::UnexpectedToken,
                    format!("`{op}` is not an operator"),
                    head.loc,
                ));
            }
            if let Some(arity) = primitive_arity(op) {
                if !arity.accepts(rest.len()) {
                    return Err(SyntaxError::new(
                        ErrorCode::BadArity,
                        format!("`{op}` expects {arity:?} arguments, got {}", rest.len()),
                        s.loc,
                    ));
                }
            }
            let args = rest.iter().map(term_from_sexp).collect::<Result<Vec<_>, _>>()?;
            Ok(Term::App(op.to_string(), args))
        }
        SexpKind::Keyword(k) => {
            Err(SyntaxError::new(ErrorCode::UnexpectedToken, format!("keyword `:{k}` in term position"), s.loc))
        }
        SexpKind::Str(_) => Err(SyntaxError::new(ErrorCode::UnexpectedToken, "string literal in term position", s.loc)),
    }
}

/// `'x`, `'5`, `'(1 2 (a))`: quoted data become literals and `cons` chains.
fn quoted_datum(s: &Sexp) -> Result<Term, SyntaxError> {
    match &s.kind {
        SexpKind::Int(n) => Ok(Term::Int(n.clone())),
        SexpKind::Ident(name) => Ok(Term::Sym(name.clone())),
        SexpKind::List(items) => {
            let mut acc = Term::nil();
            for item in items.iter().rev() {
                acc = Term::app("cons", vec![quoted_datum(item)?, acc]);
            }
            Ok(acc)
        }
        _ => Err(SyntaxError::new(ErrorCode::UnexpectedToken, "unsupported quoted datum", s.loc)),
    }
}

/// Left-hand-side patterns of definitional equations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Var(String),
    Int(BigInt),
    Nil,
    Cons(Box<Pattern>, Box<Pattern>),
    /// `(1+ p)`: a positive integer whose predecessor matches `p`.
    Succ(Box<Pattern>),
}

impl Pattern {
    pub fn vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(v) => out.push(v.clone()),
            Pattern::Int(_) | Pattern::Nil => {}
            Pattern::Cons(h, t) => {
                h.collect_vars(out);
                t.collect_vars(out);
            }
            Pattern::Succ(p) => p.collect_vars(out),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Pattern::Var(v) => Term::Var(v.clone()),
            Pattern::Int(n) => Term::Int(n.clone()),
            Pattern::Nil => Term::nil(),
            Pattern::Cons(h, t) => Term::app("cons", vec![h.to_term(), t.to_term()]),
            Pattern::Succ(p) => Term::app("1+", vec![p.to_term()]),
        }
    }

    /// Variables bound under a `Succ` (these range over naturals).
    pub fn nat_vars(&self) -> Vec<String> {
        fn go(p: &Pattern, under_succ: bool, out: &mut Vec<String>) {
            match p {
                Pattern::Var(v) if under_succ => out.push(v.clone()),
                Pattern::Var(_) | Pattern::Int(_) | Pattern::Nil => {}
                Pattern::Cons(h, t) => {
                    go(h, false, out);
                    go(t, false, out);
                }
                Pattern::Succ(inner) => go(inner, true, out),
            }
        }
        let mut out = Vec::new();
        go(self, false, &mut out);
        out
    }

    /// Strict sub-patterns, rendered as terms.
    pub fn strict_subterms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        fn go(p: &Pattern, out: &mut Vec<Term>) {
            match p {
                Pattern::Cons(h, t) => {
                    out.push(h.to_term());
                    out.push(t.to_term());
                    go(h, out);
                    go(t, out);
                }
                Pattern::Succ(inner) => {
                    out.push(inner.to_term());
                    go(inner, out);
                }
                _ => {}
            }
        }
        go(self, &mut out);
        out
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

pub(crate) fn pattern_from_sexp(s: &Sexp) -> Result<Pattern, SyntaxError> {
    let bad = |msg: &str| SyntaxError::new(ErrorCode::BadForm, msg.to_string(), s.loc);
    match &s.kind {
        SexpKind::Int(n) => {
            if n.is_negative() {
                Err(bad("negative integer patterns are not supported"))
            } else {
                Ok(Pattern::Int(n.clone()))
            }
        }
        SexpKind::Ident(name) => match name.as_str() {
            "nil" => Ok(Pattern::Nil),
            "t" => Err(bad("`t` cannot be used as a pattern")),
            _ => Ok(Pattern::Var(name.clone())),
        },
        SexpKind::Quote(inner) => match &inner.kind {
            SexpKind::List(items) if items.is_empty() => Ok(Pattern::Nil),
            SexpKind::Int(n) if !n.is_negative() => Ok(Pattern::Int(n.clone())),
            _ => Err(bad("only '() and natural numbers may be quoted in patterns")),
        },
        SexpKind::List(items) => {
            let Some((head, rest)) = items.split_first() else {
                return Ok(Pattern::Nil);
            };
            match (head.as_ident(), rest.len()) {
                (Some("cons"), 2) => {
                    Ok(Pattern::Cons(Box::new(pattern_from_sexp(&rest[0])?), Box::new(pattern_from_sexp(&rest[1])?)))
                }
                (Some("1+"), 1) => {
                    let inner = pattern_from_sexp(&rest[0])?;
                    Ok(match inner {
                        // (1+ 2) is just the literal 3
                        Pattern::Int(n) => Pattern::Int(n + 1),
                        other => Pattern::Succ(Box::new(other)),
                    })
                }
                (Some("list"), _) => {
                    let mut acc = Pattern::Nil;
                    for item in rest.iter().rev() {
                        acc = Pattern::Cons(Box::new(pattern_from_sexp(item)?), Box::new(acc));
                    }
                    Ok(acc)
                }
                _ => Err(bad("patterns are variables, naturals, nil, (cons p q), (1+ p) or (list p ...)")),
            }
        }
        _ => Err(bad("unsupported pattern")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cons() {
        let t = parse_term("(cons 1 nil)").unwrap();
        assert_eq!(t, Term::app("cons", vec![Term::int(1), Term::nil()]));
        assert_eq!(print_term(&t), "(cons 1 nil)");
    }

    #[test]
    fn parses_fst_id_body() {
        let t = parse_term("(equal (first (cons x xs)) x)").unwrap();
        let expected = Term::app(
            "equal",
            vec![Term::app("first", vec![Term::app("cons", vec![Term::var("x"), Term::var("xs")])]), Term::var("x")],
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_term("(cons 1").unwrap_err().code, ErrorCode::UnbalancedParens);
        assert_eq!(parse_term("(cons 1 2 3)").unwrap_err().code, ErrorCode::BadArity);
        assert_eq!(parse_term("(not)").unwrap_err().code, ErrorCode::BadArity);
        assert_eq!(parse_term("(1 2)").unwrap_err().code, ErrorCode::UnexpectedToken);
        assert_eq!(parse_term("(f :k)").unwrap_err().code, ErrorCode::UnexpectedToken);
    }

    #[test]
    fn quoted_lists_desugar() {
        assert_eq!(parse_term("'(1 2)").unwrap(), parse_term("(cons 1 (cons 2 nil))").unwrap());
        assert_eq!(parse_term("'()").unwrap(), Term::nil());
        assert_eq!(parse_term("'cat").unwrap(), Term::sym("cat"));
        assert_eq!(print_term(&Term::sym("cat")), "'cat");
    }

    #[test]
    fn var_prints_bare() {
        assert_eq!(print_term(&Term::var("x")), "x");
    }

    #[test]
    fn paths() {
        let t = parse_term("(and (or x y) y)").unwrap();
        assert_eq!(t.at(&[0, 1]), Some(&Term::var("y")));
        let r = t.replace_at(&[1], parse_term("(or y nil)").unwrap());
        assert_eq!(r, parse_term("(and (or x y) (or y nil))").unwrap());
        assert_eq!(t.positions().len(), 5);
    }

    #[test]
    fn list_pattern_sugar() {
        let s = read_one("(list k h l r)").unwrap();
        let p = pattern_from_sexp(&s).unwrap();
        assert_eq!(p.vars(), vec!["k", "h", "l", "r"]);
        assert_eq!(p.to_term(), parse_term("(cons k (cons h (cons l (cons r nil))))").unwrap());
    }
}

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::syntax::Term;

/// Runtime values. `nil` is both false and the empty list; `t` is true.
#[derive(Clone)]
pub enum Value {
    Int(BigInt),
    Sym(Arc<str>),
    Pair(Arc<Cell>),
}

pub struct Cell {
    pub head: Value,
    pub tail: Value,
}

impl Drop for Cell {
    // Long lists would otherwise be freed recursively.
    fn drop(&mut self) {
        let mut stack = vec![
            std::mem::replace(&mut self.head, Value::Int(BigInt::zero())),
            std::mem::replace(&mut self.tail, Value::Int(BigInt::zero())),
        ];
        while let Some(v) = stack.pop() {
            if let Value::Pair(rc) = v {
                if let Ok(mut cell) = Arc::try_unwrap(rc) {
                    stack.push(std::mem::replace(&mut cell.head, Value::Int(BigInt::zero())));
                    stack.push(std::mem::replace(&mut cell.tail, Value::Int(BigInt::zero())));
                }
            }
        }
    }
}

impl Value {
    pub fn nil() -> Value {
        static NIL: OnceLock<Value> = OnceLock::new();
        NIL.get_or_init(|| Value::Sym(Arc::from("nil"))).clone()
    }

    pub fn t() -> Value {
        static T: OnceLock<Value> = OnceLock::new();
        T.get_or_init(|| Value::Sym(Arc::from("t"))).clone()
    }

    pub fn sym(s: &str) -> Value {
        Value::Sym(Arc::from(s))
    }

    pub fn int(n: impl Into<BigInt>) -> Value {
        Value::Int(n.into())
    }

    pub fn bool(b: bool) -> Value {
        if b {
            Value::t()
        } else {
            Value::nil()
        }
    }

    pub fn cons(head: Value, tail: Value) -> Value {
        Value::Pair(Arc::new(Cell { head, tail }))
    }

    pub fn list(items: impl IntoIterator<Item = Value, IntoIter: DoubleEndedIterator>) -> Value {
        items.into_iter().rev().fold(Value::nil(), |acc, v| Value::cons(v, acc))
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Value::Sym(s) if &**s == "nil")
    }

    pub fn is_true(&self) -> bool {
        !self.is_nil()
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Value::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(c) => Some((&c.head, &c.tail)),
            _ => None,
        }
    }

    pub fn is_natural(&self) -> bool {
        matches!(self, Value::Int(n) if !n.is_negative())
    }

    pub fn is_true_list(&self) -> bool {
        let mut cur = self;
        loop {
            match cur {
                Value::Pair(c) => cur = &c.tail,
                other => return other.is_nil(),
            }
        }
    }

    /// Elements of a true list, or `None` for anything else.
    pub fn to_vec(&self) -> Option<Vec<Value>> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Value::Pair(c) => {
                    out.push(c.head.clone());
                    cur = &c.tail;
                }
                other if other.is_nil() => return Some(out),
                _ => return None,
            }
        }
    }

    /// Number of leading pairs (the `len` of ACL2).
    pub fn spine_len(&self) -> usize {
        let mut n = 0;
        let mut cur = self;
        while let Value::Pair(c) = cur {
            n += 1;
            cur = &c.tail;
        }
        n
    }

    /// A ground term that evaluates to this value.
    pub fn to_term(&self) -> Term {
        let mut items = Vec::new();
        let mut cur = self;
        while let Value::Pair(c) = cur {
            items.push(c.head.to_term());
            cur = &c.tail;
        }
        let end = match cur {
            Value::Int(n) => Term::Int(n.clone()),
            Value::Sym(s) => Term::Sym(s.to_string()),
            Value::Pair(_) => unreachable!(),
        };
        items.into_iter().rev().fold(end, |acc, h| Term::app("cons", vec![h, acc]))
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Int(_) => 0,
            Value::Sym(_) => 1,
            Value::Pair(_) => 2,
        }
    }
}

impl Ord for Value {
    /// Integers before symbols before pairs; pairs compare head first, then tail.
    fn cmp(&self, other: &Self) -> Ordering {
        let (mut a, mut b) = (self, other);
        loop {
            match (a, b) {
                (Value::Int(x), Value::Int(y)) => return x.cmp(y),
                (Value::Sym(x), Value::Sym(y)) => return x.cmp(y),
                (Value::Pair(x), Value::Pair(y)) => {
                    if Arc::ptr_eq(x, y) {
                        return Ordering::Equal;
                    }
                    match x.head.cmp(&y.head) {
                        Ordering::Equal => {
                            a = &x.tail;
                            b = &y.tail;
                        }
                        o => return o,
                    }
                }
                _ => return a.rank().cmp(&b.rank()),
            }
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Sym(s) => write!(f, "{s}"),
            Value::Pair(_) => {
                write!(f, "(")?;
                let mut cur = self;
                let mut first = true;
                while let Value::Pair(c) = cur {
                    if !first {
                        write!(f, " ")?;
                    }
                    first = false;
                    write!(f, "{}", c.head)?;
                    cur = &c.tail;
                }
                if !cur.is_nil() {
                    write!(f, " . {cur}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }
}

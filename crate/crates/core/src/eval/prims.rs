use std::borrow::Cow;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prim {
    First,
    Rest,
    Cons,
    Consp,
    Atom,
    Endp,
    Integerp,
    Natp,
    Symbolp,
    Zp,
    Not,
    Inc,
    Dec,
    Equal,
    Add,
    Sub,
    Mul,
    Lt,
    Le,
    Gt,
    Ge,
    NumEq,
    Max,
    Min,
    Floor,
    Mod,
    Xor,
    Nand,
    Nor,
    Lexorder,
    List,
}

pub const ALL: [Prim; 31] = [
    Prim::First,
    Prim::Rest,
    Prim::Cons,
    Prim::Consp,
    Prim::Atom,
    Prim::Endp,
    Prim::Integerp,
    Prim::Natp,
    Prim::Symbolp,
    Prim::Zp,
    Prim::Not,
    Prim::Inc,
    Prim::Dec,
    Prim::Equal,
    Prim::Add,
    Prim::Sub,
    Prim::Mul,
    Prim::Lt,
    Prim::Le,
    Prim::Gt,
    Prim::Ge,
    Prim::NumEq,
    Prim::Max,
    Prim::Min,
    Prim::Floor,
    Prim::Mod,
    Prim::Xor,
    Prim::Nand,
    Prim::Nor,
    Prim::Lexorder,
    Prim::List,
];

impl Prim {
    pub fn name(self) -> &'static str {
        match self {
            Prim::First => "first",
            Prim::Rest => "rest",
            Prim::Cons => "cons",
            Prim::Consp => "consp",
            Prim::Atom => "atom",
            Prim::Endp => "endp",
            Prim::Integerp => "integerp",
            Prim::Natp => "natp",
            Prim::Symbolp => "symbolp",
            Prim::Zp => "zp",
            Prim::Not => "not",
            Prim::Inc => "1+",
            Prim::Dec => "1-",
            Prim::Equal => "equal",
            Prim::Add => "+",
            Prim::Sub => "-",
            Prim::Mul => "*",
            Prim::Lt => "<",
            Prim::Le => "<=",
            Prim::Gt => ">",
            Prim::Ge => ">=",
            Prim::NumEq => "=",
            Prim::Max => "max",
            Prim::Min => "min",
            Prim::Floor => "floor",
            Prim::Mod => "mod",
            Prim::Xor => "xor",
            Prim::Nand => "nand",
            Prim::Nor => "nor",
            Prim::Lexorder => "lexorder",
            Prim::List => "list",
        }
    }

    pub fn from_name(name: &str) -> Option<Prim> {
        ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

fn num(v: &Value) -> Cow<'_, BigInt> {
    match v {
        Value::Int(n) => Cow::Borrowed(n),
        _ => Cow::Owned(BigInt::zero()),
    }
}

pub fn apply1(p: Prim, a: Value) -> Value {
    match p {
        Prim::First => match a {
            Value::Pair(c) => c.head.clone(),
            _ => Value::nil(),
        },
        Prim::Rest => match a {
            Value::Pair(c) => c.tail.clone(),
            _ => Value::nil(),
        },
        Prim::Consp => Value::bool(matches!(a, Value::Pair(_))),
        Prim::Atom | Prim::Endp => Value::bool(!matches!(a, Value::Pair(_))),
        Prim::Integerp => Value::bool(matches!(a, Value::Int(_))),
        Prim::Natp => Value::bool(a.is_natural()),
        Prim::Symbolp => Value::bool(matches!(a, Value::Sym(_))),
        Prim::Zp => Value::bool(!matches!(&a, Value::Int(n) if n.is_positive())),
        Prim::Not => Value::bool(a.is_nil()),
        Prim::Inc => Value::Int(num(&a).into_owned() + 1),
        Prim::Dec => Value::Int(num(&a).into_owned() - 1),
        _ => unreachable!("{} is not unary", p.name()),
    }
}

pub fn apply2(p: Prim, a: Value, b: Value) -> Value {
    match p {
        Prim::Cons => Value::cons(a, b),
        Prim::Equal => Value::bool(a == b),
        Prim::Add => Value::Int(&*num(&a) + &*num(&b)),
        Prim::Sub => Value::Int(&*num(&a) - &*num(&b)),
        Prim::Mul => Value::Int(&*num(&a) * &*num(&b)),
        Prim::Lt => Value::bool(num(&a) < num(&b)),
        Prim::Le => Value::bool(num(&a) <= num(&b)),
        Prim::Gt => Value::bool(num(&a) > num(&b)),
        Prim::Ge => Value::bool(num(&a) >= num(&b)),
        Prim::NumEq => Value::bool(num(&a) == num(&b)),
        Prim::Max => Value::Int(num(&a).max(num(&b)).into_owned()),
        Prim::Min => Value::Int(num(&a).min(num(&b)).into_owned()),
        Prim::Floor => {
            let (x, y) = (num(&a), num(&b));
            if y.is_zero() {
                Value::Int(BigInt::zero())
            } else {
                Value::Int(x.div_floor(&y))
            }
        }
        Prim::Mod => {
            let (x, y) = (num(&a), num(&b));
            if y.is_zero() {
                Value::Int(x.into_owned())
            } else {
                Value::Int(x.mod_floor(&y))
            }
        }
        Prim::Xor => Value::bool(a.is_true() != b.is_true()),
        Prim::Nand => Value::bool(!(a.is_true() && b.is_true())),
        Prim::Nor => Value::bool(!(a.is_true() || b.is_true())),
        Prim::Lexorder => Value::bool(a <= b),
        _ => unreachable!("{} is not binary", p.name()),
    }
}

pub fn arity(p: Prim) -> Option<usize> {
    match p {
        Prim::List => None,
        Prim::First
        | Prim::Rest
        | Prim::Consp
        | Prim::Atom
        | Prim::Endp
        | Prim::Integerp
        | Prim::Natp
        | Prim::Symbolp
        | Prim::Zp
        | Prim::Not
        | Prim::Inc
        | Prim::Dec => Some(1),
        _ => Some(2),
    }
}

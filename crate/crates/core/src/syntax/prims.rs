#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exact(usize),
    Any,
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Exact(k) => k == n,
            Arity::Any => true,
        }
    }
}

/// Arity of a built-in operator, or `None` if `name` is not built in.
/// Includes the special forms `if`, `and`, `or` and `implies`.
pub fn primitive_arity(name: &str) -> Option<Arity> {
    use Arity::*;
    Some(match name {
        "list" => Any,
        "if" => Exact(3),
        "first" | "rest" | "consp" | "atom" | "endp" | "integerp" | "natp" | "symbolp" | "zp" | "not" | "1+" | "1-" => {
            Exact(1)
        }
        "cons" | "equal" | "and" | "or" | "implies" | "+" | "-" | "*" | "<" | "<=" | ">" | ">=" | "=" | "max"
        | "min" | "floor" | "mod" | "xor" | "nand" | "nor" | "lexorder" => Exact(2),
        _ => return None,
    })
}

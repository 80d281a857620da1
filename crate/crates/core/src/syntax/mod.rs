//! Surface syntax of the mini-language: reader, terms, patterns and top-level forms.

use std::fmt;

use serde::Serialize;

mod forms;
mod prims;
pub mod reader;
mod term;

pub use forms::{
    parse_program, parse_program_named, Binder, Chain, DefEquations, Direction, Domain, Equation, Goal, Method,
    ProofScript, Property, RawDefun, Scheme, Step, TopForm, TopFormKind,
};
pub use prims::{primitive_arity, Arity};
pub use reader::{Sexp, SexpKind};
pub use term::{parse_term, print_term, Pattern, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorCode {
    UnbalancedParens,
    UnexpectedToken,
    BadArity,
    DuplicateDefinition,
    BadForm,
    DuplicateLabel,
    NonLinearPattern,
    UnboundVariable,
    Io,
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A located diagnostic, rendered as `file:line:col: code: message`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct SyntaxError {
    pub code: ErrorCode,
    pub message: String,
    pub loc: Loc,
    pub file: Option<String>,
}

impl SyntaxError {
    pub fn new(code: ErrorCode, message: impl Into<String>, loc: Loc) -> Self {
        SyntaxError { code, message: message.into(), loc, file: None }
    }

    pub fn in_file(mut self, file: impl Into<String>) -> Self {
        if self.file.is_none() {
            self.file = Some(file.into());
        }
        self
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let file = self.file.as_deref().unwrap_or("<input>");
        write!(f, "{}:{}:{}: {}: {}", file, self.loc.line, self.loc.col, self.code, self.message)
    }
}

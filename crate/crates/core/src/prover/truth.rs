use std::collections::BTreeMap;

use serde::Serialize;

use crate::eval::{eval, DefEnv, EvalError, Value};
use crate::syntax::Term;

pub const MAX_TABLE_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruthTable {
    pub vars: Vec<String>,
    /// Assignments in order TT..T first, FF..F last.
    pub rows: Vec<(Vec<bool>, bool)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("{0} variables exceed the limit of {MAX_TABLE_VARS}")]
    TooManyVariables(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Evaluates a Boolean formula over every assignment of its variables.
pub fn derive_truth_table(f: &Term, env: &DefEnv) -> Result<TruthTable, TableError> {
    let vars: Vec<String> = f.free_vars().into_iter().collect();
    let k = vars.len();
    if k > MAX_TABLE_VARS {
        return Err(TableError::TooManyVariables(k));
    }
    let mut rows = Vec::with_capacity(1 << k);
    for i in 0..(1u32 << k) {
        let bits: Vec<bool> = (0..k).map(|j| (i >> (k - 1 - j)) & 1 == 0).collect();
        let b: BTreeMap<String, Value> = vars.iter().cloned().zip(bits.iter().map(|&x| Value::bool(x))).collect();
        rows.push((bits, eval(f, &b, env)?.is_true()));
    }
    Ok(TruthTable { vars, rows })
}

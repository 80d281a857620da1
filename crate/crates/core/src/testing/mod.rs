//! Randomized property testing with reproducible seeds.

mod rng;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::eval::{DefEnv, EvalError, Value};
use crate::syntax::{Property, Term};

pub use rng::SplitMix64;

pub const DEFAULT_NATURAL_BOUND: u64 = 100;
pub const MAX_LIST_LEN: u64 = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenSpec {
    /// Uniform on [-100, 100].
    Integer,
    /// Uniform on [0, bound].
    Natural(u64),
    /// True list with length uniform on [0, 20].
    ListOf(Box<GenSpec>),
    /// An integer, a symbol, or a list of integers, each with probability 1/3.
    Object,
    Symbol(Vec<String>),
}

impl GenSpec {
    pub fn default_symbols() -> GenSpec {
        GenSpec::Symbol(["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect())
    }
}

pub fn generate(g: &GenSpec, rng: &mut SplitMix64) -> Value {
    match g {
        GenSpec::Integer => Value::from(rng.below(201) as i64 - 100),
        GenSpec::Natural(bound) => Value::int(rng.below(bound.saturating_add(1))),
        GenSpec::ListOf(elem) => {
            let n = rng.below(MAX_LIST_LEN + 1);
            let items: Vec<Value> = (0..n).map(|_| generate(elem, rng)).collect();
            Value::list(items)
        }
        GenSpec::Object => match rng.below(3) {
            0 => generate(&GenSpec::Integer, rng),
            1 => generate(&GenSpec::default_symbols(), rng),
            _ => generate(&GenSpec::ListOf(Box::new(GenSpec::Integer)), rng),
        },
        GenSpec::Symbol(alphabet) => {
            if alphabet.is_empty() {
                Value::nil()
            } else {
                Value::sym(&alphabet[rng.below(alphabet.len() as u64) as usize])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TestOutcome {
    Pass {
        trials: u32,
        /// Trials whose `implies` hypothesis was false.
        vacuous: u32,
    },
    Counterexample {
        bindings: BTreeMap<String, Value>,
        trial_index: u32,
        seed: u64,
    },
}

impl TestOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, TestOutcome::Pass { .. })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("trial {trial_index} failed to evaluate: {error}")]
pub struct PropertyError {
    pub trial_index: u32,
    pub bindings: BTreeMap<String, Value>,
    pub error: EvalError,
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Values for trial `index`: a function of `(seed, index)` only.
pub fn trial_bindings(p: &Property, seed: u64, index: u32) -> Vec<Value> {
    let mut rng = SplitMix64::for_trial(seed, index as u64);
    p.binders.iter().map(|b| generate(&b.gen, &mut rng)).collect()
}

pub fn run_property(p: &Property, seed: u64, defs: &DefEnv) -> Result<TestOutcome, PropertyError> {
    run_trials(p, seed, p.trials, defs)
}

pub fn run_trials(p: &Property, seed: u64, trials: u32, defs: &DefEnv) -> Result<TestOutcome, PropertyError> {
    let vars: Vec<String> = p.binders.iter().map(|b| b.var.clone()).collect();
    let named = |vals: &[Value]| vars.iter().cloned().zip(vals.iter().cloned()).collect::<BTreeMap<_, _>>();
    let prep_err = |error| PropertyError { trial_index: 0, bindings: BTreeMap::new(), error };
    let claim = defs.prepare(&p.claim, &vars).map_err(prep_err)?;
    let hyp = match &p.claim {
        Term::App(op, args) if op == "implies" => Some(defs.prepare(&args[0], &vars).map_err(prep_err)?),
        _ => None,
    };
    let mut vacuous = 0;
    for i in 0..trials {
        let vals = trial_bindings(p, seed, i);
        let fail = |error| PropertyError { trial_index: i, bindings: named(&vals), error };
        if let Some(h) = &hyp {
            if defs.run(h, &vals).map_err(fail)?.is_nil() {
                vacuous += 1;
                continue;
            }
        }
        if defs.run(&claim, &vals).map_err(fail)?.is_nil() {
            return Ok(TestOutcome::Counterexample { bindings: named(&vals), trial_index: i, seed });
        }
    }
    Ok(TestOutcome::Pass { trials, vacuous })
}

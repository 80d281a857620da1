//! Step-count measurement, growth-rate fitting and recurrence checking.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::eval::{DefEnv, EvalError, StepCount, Value};
use crate::testing::SplitMix64;

/// Fuel used while measuring; quadratic sorts at a few thousand elements
/// need far more than the interactive default.
pub const MEASURE_FUEL: u64 = 100_000_000_000;
pub const SAMPLES: usize = 5;
pub const DEFAULT_WINDOW: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("at least 4 sizes are needed, got {0}")]
    TooFewSizes(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// Random integers.
    Random,
    /// Distinct integers in descending order.
    ReverseSorted,
    /// Distinct integers in ascending order.
    Sorted,
}

/// One input list of length `n`.
pub fn input_list(kind: InputKind, n: usize, rng: &mut SplitMix64) -> Value {
    match kind {
        InputKind::Random => Value::list((0..n).map(|_| Value::from(rng.below(1_000_000) as i64))),
        InputKind::ReverseSorted => Value::list((0..n).rev().map(|i| Value::from(i as i64))),
        InputKind::Sorted => Value::list((0..n).map(|i| Value::from(i as i64))),
    }
}

/// Median step count of `op` over `SAMPLES` inputs of each size.
pub fn measure_steps(
    env: &DefEnv,
    op: &str,
    kind: InputKind,
    sizes: &[usize],
    seed: u64,
) -> Result<BTreeMap<usize, StepCount>, CostError> {
    let mut env = env.clone();
    env.set_fuel(env.fuel().max(MEASURE_FUEL));
    let mut out = BTreeMap::new();
    for &n in sizes {
        // Deterministic inputs give identical counts, so one run is the median.
        let samples = if kind == InputKind::Random { SAMPLES } else { 1 };
        let mut counts = Vec::with_capacity(samples);
        for i in 0..samples {
            let mut rng = SplitMix64::for_trial(seed ^ n as u64, i as u64);
            let (_, c) = env.call_counting(op, vec![input_list(kind, n, &mut rng)])?;
            counts.push(c);
        }
        counts.sort_by_key(|c| c.total);
        out.insert(n, counts.swap_remove(samples / 2));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Growth {
    #[serde(rename = "n")]
    Linear,
    #[serde(rename = "n log2 n")]
    NLogN,
    #[serde(rename = "n^2")]
    Quadratic,
}

impl Growth {
    pub fn eval(self, n: f64) -> f64 {
        match self {
            Growth::Linear => n,
            Growth::NLogN => n * n.log2(),
            Growth::Quadratic => n * n,
        }
    }

    pub fn parse(s: &str) -> Option<Growth> {
        Some(match s {
            "n" => Growth::Linear,
            "nlogn" | "n log n" | "n log2 n" => Growth::NLogN,
            "n2" | "n^2" => Growth::Quadratic,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundVerdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub sizes: Vec<usize>,
    pub steps: Vec<u64>,
    pub candidate: String,
    /// c(n) = steps(n) / f(n) for every size.
    pub ratios: Vec<f64>,
    pub c_lo: f64,
    pub c_hi: f64,
    pub verdict: BoundVerdict,
}

/// Fits `steps(n) ≈ c·f(n)` over the largest half of the sizes.
pub fn check_bound(
    measurements: &[(usize, u64)],
    candidate: &str,
    f: impl Fn(f64) -> f64,
    window: f64,
) -> Result<BoundReport, CostError> {
    let k = measurements.len();
    if k < 4 {
        return Err(CostError::TooFewSizes(k));
    }
    let mut m = measurements.to_vec();
    m.sort();
    let ratios: Vec<f64> = m.iter().map(|&(n, s)| s as f64 / f(n as f64)).collect();
    let tail = &ratios[k - k.div_ceil(2)..];
    let c_lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let c_hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let verdict =
        if c_lo > 0.0 && c_hi / c_lo <= window { BoundVerdict::Consistent } else { BoundVerdict::Inconsistent };
    Ok(BoundReport {
        sizes: m.iter().map(|p| p.0).collect(),
        steps: m.iter().map(|p| p.1).collect(),
        candidate: candidate.to_string(),
        ratios,
        c_lo,
        c_hi,
        verdict,
    })
}

/// Index of a recursive reference in a recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Index {
    Floor(u64),
    Ceil(u64),
    Minus(u64),
}

impl Index {
    fn at(self, n: u64) -> u64 {
        match self {
            Index::Floor(k) => n / k,
            Index::Ceil(k) => n.div_ceil(k),
            Index::Minus(k) => n.saturating_sub(k),
        }
    }
}

/// Right-hand side of `T(n) = ...`.
#[derive(Debug, Clone, PartialEq)]
pub enum RecExpr {
    Num(f64),
    N,
    T(Index),
    Add(Vec<RecExpr>),
    Mul(Box<RecExpr>, Box<RecExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recurrence {
    pub base: BTreeMap<u64, f64>,
    pub step: RecExpr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RecurrenceVerdict {
    /// `c` is the least constant that works over the range.
    Holds {
        c: f64,
    },
    Fails {
        c_needed: f64,
        worst_n: u64,
    },
    IllFounded {
        n: u64,
    },
}

struct Unfold<'a> {
    r: &'a Recurrence,
    memo: HashMap<u64, f64>,
}

impl Unfold<'_> {
    fn value(&mut self, n: u64) -> Result<f64, u64> {
        if let Some(&v) = self.r.base.get(&n) {
            return Ok(v);
        }
        if let Some(&v) = self.memo.get(&n) {
            return Ok(v);
        }
        if self.r.base.keys().next().is_none_or(|&lo| n < lo) {
            return Err(n);
        }
        let v = self.expr(&self.r.step.clone(), n)?;
        self.memo.insert(n, v);
        Ok(v)
    }

    fn expr(&mut self, e: &RecExpr, n: u64) -> Result<f64, u64> {
        Ok(match e {
            RecExpr::Num(x) => *x,
            RecExpr::N => n as f64,
            RecExpr::T(ix) => {
                let m = ix.at(n);
                if m >= n {
                    return Err(n);
                }
                self.value(m)?
            }
            RecExpr::Add(es) => {
                let mut s = 0.0;
                for e in es {
                    s += self.expr(e, n)?;
                }
                s
            }
            RecExpr::Mul(a, b) => self.expr(a, n)? * self.expr(b, n)?,
        })
    }
}

/// Unfolds the recurrence over `ns` and looks for `c` in `[c_lo, c_hi]` with
/// `T(n) ≤ c·g(n)` throughout.
pub fn check_recurrence(
    r: &Recurrence,
    g: impl Fn(f64) -> f64,
    c_range: (f64, f64),
    ns: impl IntoIterator<Item = u64>,
) -> RecurrenceVerdict {
    let mut u = Unfold { r, memo: HashMap::new() };
    let mut need = c_range.0;
    let mut worst = 0;
    for n in ns {
        let t = match u.value(n) {
            Ok(t) => t,
            Err(bad) => return RecurrenceVerdict::IllFounded { n: bad },
        };
        let gn = g(n as f64);
        let c = if gn > 0.0 {
            t / gn
        } else if t <= 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if c > need {
            need = c;
            worst = n;
        }
    }
    if need <= c_range.1 {
        RecurrenceVerdict::Holds { c: need }
    } else {
        RecurrenceVerdict::Fails { c_needed: need, worst_n: worst }
    }
}

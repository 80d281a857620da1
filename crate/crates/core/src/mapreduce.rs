//! Sequential map/group/reduce over key/value pairs.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value as Json;
use thiserror::Error;

use crate::eval::{DefEnv, EvalError, Value};
use crate::workbench::Workbench;

/// Source of the sample jobs' mappers and reducers.
pub const JOBS_SOURCE: &str = include_str!("../../../corpus/defs/mapreduce.lx");

pub type Kv = (Value, Value);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MrError {
    #[error("mapper `{name}` must take {expected} arguments")]
    MapperArity { name: String, expected: usize },
    #[error("reducer `{0}` must take 2 arguments")]
    ReducerArity(String),
    #[error("`{0}` is not an admitted operator")]
    UnknownOperator(String),
    #[error("`{name}` returned {value}, which is not a list of pairs")]
    BadOutput { name: String, value: Value },
    #[error("damping must lie strictly between 0 and 1")]
    BadDamping,
    #[error("bad input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Maps every input pair in order, groups by key (values in emission
/// order), and reduces the groups in increasing key order.
pub fn run_job<K: Ord + Clone, V, E>(
    input: impl IntoIterator<Item = (K, V)>,
    mut map: impl FnMut(K, V) -> Result<Vec<(K, V)>, E>,
    mut reduce: impl FnMut(&K, Vec<V>) -> Result<Vec<(K, V)>, E>,
) -> Result<Vec<(K, V)>, E> {
    let mut groups: BTreeMap<K, Vec<V>> = BTreeMap::new();
    for (k, v) in input {
        for (k2, v2) in map(k, v)? {
            groups.entry(k2).or_default().push(v2);
        }
    }
    let mut out = Vec::new();
    for (k, vs) in groups {
        out.extend(reduce(&k, vs)?);
    }
    Ok(out)
}

/// A job whose mapper and reducer are admitted operators. `extra`
/// arguments are passed to the mapper after the key and value.
#[derive(Debug, Clone)]
pub struct Job {
    pub mapper: String,
    pub reducer: String,
    pub extra: Vec<Value>,
}

fn pairs(name: &str, v: Value) -> Result<Vec<Kv>, MrError> {
    let bad = || MrError::BadOutput { name: name.to_string(), value: v.clone() };
    let items = v.to_vec().ok_or_else(bad)?;
    items.into_iter().map(|p| p.as_pair().map(|(a, b)| (a.clone(), b.clone())).ok_or_else(bad)).collect()
}

pub fn mapreduce(job: &Job, input: &[Kv], defs: &DefEnv) -> Result<Vec<Kv>, MrError> {
    let margs = 2 + job.extra.len();
    match defs.arity(&job.mapper) {
        None => return Err(MrError::UnknownOperator(job.mapper.clone())),
        Some(n) if n != margs => return Err(MrError::MapperArity { name: job.mapper.clone(), expected: margs }),
        _ => {}
    }
    match defs.arity(&job.reducer) {
        None => return Err(MrError::UnknownOperator(job.reducer.clone())),
        Some(n) if n != 2 => return Err(MrError::ReducerArity(job.reducer.clone())),
        _ => {}
    }
    run_job(
        input.iter().cloned(),
        |k, v| {
            let mut args = vec![k, v];
            args.extend(job.extra.iter().cloned());
            pairs(&job.mapper, defs.call(&job.mapper, args)?)
        },
        |k, vs| pairs(&job.reducer, defs.call(&job.reducer, vec![k.clone(), Value::list(vs)])?),
    )
}

/// Definitions of the sample jobs, admitted from [`JOBS_SOURCE`].
pub fn jobs_env() -> DefEnv {
    let mut w = Workbench::new();
    w.load_str(JOBS_SOURCE, "mapreduce.lx", None).expect("job definitions load");
    debug_assert!(w.items.iter().all(|i| i.ok()));
    w.env
}

/// `(doc-id, tokens)` pairs to `(token, count)`.
pub fn job_wordcount(docs: &[Kv], env: &DefEnv) -> Result<Vec<Kv>, MrError> {
    mapreduce(&Job { mapper: "wc-map".into(), reducer: "wc-reduce".into(), extra: vec![] }, docs, env)
}

/// `(line-no, tokens)` pairs to those lines containing `pattern`.
pub fn job_grep(pattern: &Value, lines: &[Kv], env: &DefEnv) -> Result<Vec<Kv>, MrError> {
    let job = Job { mapper: "grep-map".into(), reducer: "grep-reduce".into(), extra: vec![pattern.clone()] };
    mapreduce(&job, lines, env)
}

/// `(source, targets)` to `(target, sorted distinct sources)`.
pub fn invert_links(graph: &[Kv], env: &DefEnv) -> Result<Vec<Kv>, MrError> {
    mapreduce(&Job { mapper: "il-map".into(), reducer: "il-reduce".into(), extra: vec![] }, graph, env)
}

/// Parses a decimal such as `0.85` exactly.
pub fn parse_damping(s: &str) -> Result<BigRational, MrError> {
    let bad = || MrError::BadInput(format!("`{s}` is not a decimal number"));
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{}{frac}", if int.is_empty() { "0" } else { int }).parse().map_err(|_| bad())?;
    let d = BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32));
    if d <= BigRational::zero() || d >= BigRational::one() {
        return Err(MrError::BadDamping);
    }
    Ok(d)
}

pub type Ranks = Vec<(Value, BigRational)>;

/// Rank vectors after each round, starting with the uniform vector.
/// Dangling nodes spread their rank uniformly over all nodes.
pub fn pagerank_rounds(
    graph: &[(Value, Vec<Value>)],
    iterations: u32,
    damping: &BigRational,
) -> Result<Vec<Ranks>, MrError> {
    if *damping <= BigRational::zero() || *damping >= BigRational::one() {
        return Err(MrError::BadDamping);
    }
    let mut out_links: BTreeMap<Value, BTreeSet<Value>> = BTreeMap::new();
    for (src, targets) in graph {
        let e = out_links.entry(src.clone()).or_default();
        e.extend(targets.iter().cloned());
    }
    let all: Vec<Value> = out_links
        .keys()
        .cloned()
        .chain(out_links.values().flatten().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if all.is_empty() {
        return Ok(vec![Vec::new(); iterations as usize + 1]);
    }
    let n = BigRational::from_integer(BigInt::from(all.len()));
    let mut rank: BTreeMap<Value, BigRational> = all.iter().map(|v| (v.clone(), n.recip())).collect();
    let mut history = vec![rank.clone().into_iter().collect::<Ranks>()];
    let base = (BigRational::one() - damping) / &n;
    for _ in 0..iterations {
        let dangling: BigRational =
            all.iter().filter(|v| out_links.get(*v).is_none_or(BTreeSet::is_empty)).map(|v| rank[v].clone()).sum();
        let share = &dangling / &n;
        let next = run_job::<Value, BigRational, MrError>(
            rank.iter().map(|(k, r)| (k.clone(), r.clone())),
            |v, r| {
                let mut emitted = vec![(v.clone(), BigRational::zero())];
                if let Some(ts) = out_links.get(&v).filter(|ts| !ts.is_empty()) {
                    let part = r / BigRational::from_integer(BigInt::from(ts.len()));
                    emitted.extend(ts.iter().map(|t| (t.clone(), part.clone())));
                }
                Ok(emitted)
            },
            |k, incoming| {
                let total: BigRational = incoming.into_iter().sum();
                Ok(vec![(k.clone(), &base + damping * (total + &share))])
            },
        )?;
        rank = next.into_iter().collect();
        history.push(rank.clone().into_iter().collect());
    }
    Ok(history)
}

pub fn pagerank(graph: &[(Value, Vec<Value>)], iterations: u32, damping: &BigRational) -> Result<Ranks, MrError> {
    Ok(pagerank_rounds(graph, iterations, damping)?.pop().unwrap_or_default())
}

/// JSON form of a value: integers as numbers (or `{"int": "digits"}` beyond
/// 64 bits), symbols as strings, proper lists as arrays, other pairs as
/// `{"cons": [head, tail]}`.
pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Int(n) => match n.to_i64() {
            Some(i) => Json::from(i),
            None => serde_json::json!({ "int": n.to_string() }),
        },
        _ if v.is_nil() => Json::Array(vec![]),
        Value::Sym(s) => Json::String(s.to_string()),
        Value::Pair(_) => match v.to_vec() {
            Some(items) => Json::Array(items.iter().map(value_to_json).collect()),
            None => {
                let (h, t) = v.as_pair().expect("pair");
                serde_json::json!({ "cons": [value_to_json(h), value_to_json(t)] })
            }
        },
    }
}

pub fn json_to_value(j: &Json) -> Result<Value, MrError> {
    let bad = || MrError::BadInput(format!("cannot read {j} as a value"));
    Ok(match j {
        Json::Number(n) => Value::Int(n.as_i64().map(BigInt::from).ok_or_else(bad)?),
        Json::String(s) => Value::sym(s),
        Json::Bool(b) => Value::bool(*b),
        Json::Null => Value::nil(),
        Json::Array(items) => Value::list(items.iter().map(json_to_value).collect::<Result<Vec<_>, _>>()?),
        Json::Object(m) => match (m.get("int"), m.get("cons")) {
            (Some(Json::String(d)), None) if m.len() == 1 => Value::Int(d.parse().map_err(|_| bad())?),
            (None, Some(Json::Array(ht))) if m.len() == 1 && ht.len() == 2 => {
                Value::cons(json_to_value(&ht[0])?, json_to_value(&ht[1])?)
            }
            _ => return Err(bad()),
        },
    })
}

/// Reads a JSON array of `[key, value]` pairs.
pub fn pairs_from_json(j: &Json) -> Result<Vec<Kv>, MrError> {
    let Json::Array(items) = j else { return Err(MrError::BadInput("expected an array of pairs".into())) };
    items
        .iter()
        .map(|it| match it {
            Json::Array(kv) if kv.len() == 2 => Ok((json_to_value(&kv[0])?, json_to_value(&kv[1])?)),
            _ => Err(MrError::BadInput(format!("{it} is not a [key, value] pair"))),
        })
        .collect()
}

pub fn pairs_to_json(kvs: &[Kv]) -> Json {
    Json::Array(kvs.iter().map(|(k, v)| Json::Array(vec![value_to_json(k), value_to_json(v)])).collect())
}

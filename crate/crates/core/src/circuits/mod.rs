//! Gate-level netlists and their correspondence with Boolean formulas.

mod basis;
mod bits;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::Term;

pub use basis::{to_basis, Basis};
pub use bits::{big_add, big_mul, from_bits, to_bits, Bits};

pub const MAX_EQUIV_INPUTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("operator `{0}` is not a Boolean connective")]
    NonBooleanOperator(String),
    #[error("no value for input `{0}`")]
    MissingInput(String),
    #[error("{0} inputs exceed the limit of {MAX_EQUIV_INPUTS}")]
    TooManyInputs(usize),
    #[error("netlists have different ports")]
    PortMismatch,
    #[error("adder width must be at least 1")]
    BadWidth,
    #[error("numeral is not canonical")]
    NonCanonicalInput,
    #[error("invalid netlist: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Or,
    Not,
    Nand,
    Nor,
    Xor,
    Impl,
    Const0,
    Const1,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Const0 | GateKind::Const1 => 0,
            GateKind::Not => 1,
            _ => 2,
        }
    }

    /// Bitwise evaluation over 64 lanes.
    pub fn apply(self, a: u64, b: u64) -> u64 {
        match self {
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Not => !a,
            GateKind::Nand => !(a & b),
            GateKind::Nor => !(a | b),
            GateKind::Xor => a ^ b,
            GateKind::Impl => !a | b,
            GateKind::Const0 => 0,
            GateKind::Const1 => !0,
        }
    }

    fn operator(self) -> &'static str {
        match self {
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Not => "not",
            GateKind::Nand => "nand",
            GateKind::Nor => "nor",
            GateKind::Xor => "xor",
            GateKind::Impl => "implies",
            GateKind::Const0 => "nil",
            GateKind::Const1 => "t",
        }
    }

    fn from_operator(op: &str) -> Option<GateKind> {
        Some(match op {
            "and" => GateKind::And,
            "or" => GateKind::Or,
            "not" => GateKind::Not,
            "nand" => GateKind::Nand,
            "nor" => GateKind::Nor,
            "xor" => GateKind::Xor,
            "implies" => GateKind::Impl,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wire {
    Input(usize),
    Gate(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<Wire>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Netlist {
    pub inputs: Vec<String>,
    pub gates: Vec<Gate>,
    pub outputs: Vec<(String, Wire)>,
}

impl Netlist {
    pub fn new(inputs: Vec<String>) -> Self {
        Netlist { inputs, gates: Vec::new(), outputs: Vec::new() }
    }

    pub fn input(&self, name: &str) -> Option<Wire> {
        self.inputs.iter().position(|n| n == name).map(Wire::Input)
    }

    pub fn add(&mut self, kind: GateKind, inputs: &[Wire]) -> Wire {
        self.gates.push(Gate { kind, inputs: inputs.to_vec() });
        Wire::Gate(self.gates.len() - 1)
    }

    pub fn output(&mut self, name: impl Into<String>, w: Wire) {
        self.outputs.push((name.into(), w));
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Checks arities and topological order.
    pub fn validate(&self) -> Result<(), CircuitError> {
        let ok = |w: &Wire, limit: usize| match *w {
            Wire::Input(i) => i < self.inputs.len(),
            Wire::Gate(g) => g < limit,
        };
        for (i, g) in self.gates.iter().enumerate() {
            if g.inputs.len() != g.kind.arity() {
                return Err(CircuitError::Invalid(format!("gate {i} has {} inputs", g.inputs.len())));
            }
            if !g.inputs.iter().all(|w| ok(w, i)) {
                return Err(CircuitError::Invalid(format!("gate {i} refers forward or out of range")));
            }
        }
        if !self.outputs.iter().all(|(_, w)| ok(w, self.gates.len())) {
            return Err(CircuitError::Invalid("output out of range".into()));
        }
        Ok(())
    }

    /// Evaluates 64 assignments at once; `lanes[i]` holds input `i`.
    pub fn simulate_words(&self, lanes: &[u64]) -> Vec<u64> {
        let mut vals = Vec::with_capacity(self.gates.len());
        let get = |w: &Wire, vals: &Vec<u64>| match *w {
            Wire::Input(i) => lanes[i],
            Wire::Gate(g) => vals[g],
        };
        for g in &self.gates {
            let a = g.inputs.first().map_or(0, |w| get(w, &vals));
            let b = g.inputs.get(1).map_or(0, |w| get(w, &vals));
            vals.push(g.kind.apply(a, b));
        }
        self.outputs.iter().map(|(_, w)| get(w, &vals)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serializes")
    }

    pub fn from_json(text: &str) -> Result<Netlist, CircuitError> {
        let n: Netlist = serde_json::from_str(text).map_err(|e| CircuitError::Invalid(e.to_string()))?;
        n.validate()?;
        Ok(n)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph netlist {\n  rankdir=LR;\n");
        let node = |w: &Wire| match *w {
            Wire::Input(i) => format!("in{i}"),
            Wire::Gate(g) => format!("g{g}"),
        };
        for (i, name) in self.inputs.iter().enumerate() {
            let _ = writeln!(s, "  in{i} [label=\"{name}\", shape=plaintext];");
        }
        for (i, g) in self.gates.iter().enumerate() {
            let _ = writeln!(s, "  g{i} [label=\"{:?}\", shape=box];", g.kind);
            for w in &g.inputs {
                let _ = writeln!(s, "  {} -> g{i};", node(w));
            }
        }
        for (j, (name, w)) in self.outputs.iter().enumerate() {
            let _ = writeln!(s, "  out{j} [label=\"{name}\", shape=plaintext];");
            let _ = writeln!(s, "  {} -> out{j};", node(w));
        }
        s.push_str("}\n");
        s
    }
}

/// Simulates one assignment.
pub fn simulate(n: &Netlist, assignment: &BTreeMap<String, bool>) -> Result<Vec<bool>, CircuitError> {
    let lanes = n
        .inputs
        .iter()
        .map(|p| assignment.get(p).map(|&b| if b { 1 } else { 0 }).ok_or_else(|| CircuitError::MissingInput(p.clone())))
        .collect::<Result<Vec<u64>, _>>()?;
    Ok(n.simulate_words(&lanes).into_iter().map(|w| w & 1 == 1).collect())
}

fn build(n: &mut Netlist, f: &Term) -> Result<Wire, CircuitError> {
    match f {
        Term::Var(v) => n.input(v).ok_or_else(|| CircuitError::MissingInput(v.clone())),
        Term::Sym(s) if s == "t" => Ok(n.add(GateKind::Const1, &[])),
        Term::Sym(s) if s == "nil" => Ok(n.add(GateKind::Const0, &[])),
        Term::App(op, args) => {
            let kind = GateKind::from_operator(op)
                .filter(|k| k.arity() == args.len())
                .ok_or_else(|| CircuitError::NonBooleanOperator(op.clone()))?;
            let ws = args.iter().map(|a| build(n, a)).collect::<Result<Vec<_>, _>>()?;
            Ok(n.add(kind, &ws))
        }
        other => Err(CircuitError::NonBooleanOperator(other.to_string())),
    }
}

/// Tree-shaped netlist for several formulas over the given input ports.
pub fn formulas_to_circuit(inputs: Vec<String>, outputs: &[(String, Term)]) -> Result<Netlist, CircuitError> {
    let mut n = Netlist::new(inputs);
    for (name, f) in outputs {
        let w = build(&mut n, f)?;
        n.output(name.clone(), w);
    }
    Ok(n)
}

/// Netlist with one output; inputs are the formula's variables in sorted order.
pub fn formula_to_circuit(f: &Term) -> Result<Netlist, CircuitError> {
    formulas_to_circuit(f.free_vars().into_iter().collect(), &[("out".to_string(), f.clone())])
}

/// Unfolds the cone of output `index` into a formula; shared gates are duplicated.
pub fn circuit_to_formula(n: &Netlist, index: usize) -> Term {
    fn go(n: &Netlist, w: Wire) -> Term {
        match w {
            Wire::Input(i) => Term::var(n.inputs[i].clone()),
            Wire::Gate(g) => {
                let gate = &n.gates[g];
                match gate.kind {
                    GateKind::Const0 => Term::nil(),
                    GateKind::Const1 => Term::t(),
                    k => Term::app(k.operator(), gate.inputs.iter().map(|&x| go(n, x)).collect()),
                }
            }
        }
    }
    go(n, n.outputs[index].1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", content = "witness", rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent,
    Differ(BTreeMap<String, bool>),
}

/// Lane words for assignments `base..base+64`; the first input is the most
/// significant bit of the assignment index.
fn lane_words(k: usize, base: u64) -> Vec<u64> {
    (0..k)
        .map(|j| {
            let shift = k - 1 - j;
            let mut w = 0u64;
            for l in 0..64u64 {
                if ((base + l) >> shift) & 1 == 1 {
                    w |= 1 << l;
                }
            }
            w
        })
        .collect()
}

/// Compares two netlists on every assignment.
pub fn exhaustive_equiv(a: &Netlist, b: &Netlist) -> Result<Equivalence, CircuitError> {
    if a.inputs != b.inputs || a.outputs.len() != b.outputs.len() {
        return Err(CircuitError::PortMismatch);
    }
    let k = a.inputs.len();
    if k > MAX_EQUIV_INPUTS {
        return Err(CircuitError::TooManyInputs(k));
    }
    let total = 1u64 << k;
    let mut base = 0u64;
    while base < total {
        let lanes = lane_words(k, base);
        let live = if total - base >= 64 { !0u64 } else { (1u64 << (total - base)) - 1 };
        let diff =
            a.simulate_words(&lanes).iter().zip(b.simulate_words(&lanes)).fold(0u64, |acc, (x, y)| acc | (x ^ y))
                & live;
        if diff != 0 {
            let i = base + diff.trailing_zeros() as u64;
            let w = a.inputs.iter().enumerate().map(|(j, p)| (p.clone(), (i >> (k - 1 - j)) & 1 == 1)).collect();
            return Ok(Equivalence::Differ(w));
        }
        base += 64;
    }
    Ok(Equivalence::Equivalent)
}

/// n-bit ripple-carry adder built from full-adder cells.
pub fn ripple_carry(width: usize) -> Result<Netlist, CircuitError> {
    if width == 0 {
        return Err(CircuitError::BadWidth);
    }
    let mut inputs: Vec<String> = (0..width).map(|i| format!("x{i}")).collect();
    inputs.extend((0..width).map(|i| format!("y{i}")));
    inputs.push("cin".into());
    let mut n = Netlist::new(inputs);
    let mut c = Wire::Input(2 * width);
    for i in 0..width {
        let (x, y) = (Wire::Input(i), Wire::Input(width + i));
        let t = n.add(GateKind::Xor, &[x, y]);
        let s = n.add(GateKind::Xor, &[t, c]);
        let g = n.add(GateKind::And, &[x, y]);
        let p = n.add(GateKind::And, &[c, t]);
        c = n.add(GateKind::Or, &[g, p]);
        n.output(format!("s{i}"), s);
    }
    n.output("cout", c);
    Ok(n)
}

/// Simulates `ripple_carry(width)` on every `(x, y, cin)` and returns the
/// first triple whose output differs from `x + y + cin`.
pub fn check_adder(width: usize) -> Result<Option<(u64, u64, bool)>, CircuitError> {
    if 2 * width + 1 > MAX_EQUIV_INPUTS {
        return Err(CircuitError::TooManyInputs(2 * width + 1));
    }
    let n = ripple_carry(width)?;
    let total = 1u64 << (2 * width + 1);
    let mut base = 0;
    while base < total {
        let lanes: Vec<u64> = (0..=2 * width)
            .map(|j| (0..64u64).filter(|l| ((base + l) >> j) & 1 == 1).fold(0, |w, l| w | 1 << l))
            .collect();
        let outs = n.simulate_words(&lanes);
        for l in 0..64.min(total - base) {
            let i = base + l;
            let mask = (1u64 << width) - 1;
            let (x, y, cin) = (i & mask, (i >> width) & mask, (i >> (2 * width)) & 1);
            let got = outs.iter().enumerate().fold(0u64, |acc, (k, w)| acc | ((w >> l) & 1) << k);
            if got != x + y + cin {
                return Ok(Some((x, y, cin == 1)));
            }
        }
        base += 64;
    }
    Ok(None)
}

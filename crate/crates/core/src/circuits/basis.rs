use serde::Serialize;

use super::{GateKind, Netlist, Wire};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Nand,
    /// Implication gates plus a constant-false wire.
    Impl,
}

impl Basis {
    pub fn allows(self, k: GateKind) -> bool {
        match self {
            Basis::Nand => k == GateKind::Nand,
            Basis::Impl => matches!(k, GateKind::Impl | GateKind::Const0),
        }
    }
}

struct Builder {
    out: Netlist,
    zero: Option<Wire>,
}

impl Builder {
    fn nand(&mut self, a: Wire, b: Wire) -> Wire {
        self.out.add(GateKind::Nand, &[a, b])
    }

    fn imp(&mut self, a: Wire, b: Wire) -> Wire {
        self.out.add(GateKind::Impl, &[a, b])
    }

    fn zero(&mut self) -> Wire {
        match self.zero {
            Some(z) => z,
            None => {
                let z = self.out.add(GateKind::Const0, &[]);
                self.zero = Some(z);
                z
            }
        }
    }

    fn nand_gate(&mut self, k: GateKind, a: Wire, b: Wire) -> Wire {
        match k {
            GateKind::Nand => self.nand(a, b),
            GateKind::Not => self.nand(a, a),
            GateKind::And => {
                let t = self.nand(a, b);
                self.nand(t, t)
            }
            GateKind::Or => {
                let na = self.nand(a, a);
                let nb = self.nand(b, b);
                self.nand(na, nb)
            }
            GateKind::Nor => {
                let o = self.nand_gate(GateKind::Or, a, b);
                self.nand(o, o)
            }
            GateKind::Xor => {
                let t = self.nand(a, b);
                let l = self.nand(a, t);
                let r = self.nand(b, t);
                self.nand(l, r)
            }
            GateKind::Impl => {
                let nb = self.nand(b, b);
                self.nand(a, nb)
            }
            GateKind::Const0 | GateKind::Const1 => match self.out.inputs.len() {
                // Without an input wire there is nothing to derive a constant from.
                0 => self.out.add(k, &[]),
                _ => {
                    let x = Wire::Input(0);
                    let nx = self.nand(x, x);
                    let one = self.nand(x, nx);
                    if k == GateKind::Const1 {
                        one
                    } else {
                        self.nand(one, one)
                    }
                }
            },
        }
    }

    fn impl_gate(&mut self, k: GateKind, a: Wire, b: Wire) -> Wire {
        match k {
            GateKind::Impl => self.imp(a, b),
            GateKind::Const0 => self.zero(),
            GateKind::Const1 => {
                let z = self.zero();
                self.imp(z, z)
            }
            GateKind::Not => {
                let z = self.zero();
                self.imp(a, z)
            }
            GateKind::Or => {
                let na = self.impl_gate(GateKind::Not, a, a);
                self.imp(na, b)
            }
            GateKind::And => {
                let nb = self.impl_gate(GateKind::Not, b, b);
                let t = self.imp(a, nb);
                self.impl_gate(GateKind::Not, t, t)
            }
            GateKind::Nand => {
                let nb = self.impl_gate(GateKind::Not, b, b);
                self.imp(a, nb)
            }
            GateKind::Nor => {
                let o = self.impl_gate(GateKind::Or, a, b);
                self.impl_gate(GateKind::Not, o, o)
            }
            GateKind::Xor => {
                let ab = self.imp(a, b);
                let ba = self.imp(b, a);
                let nba = self.impl_gate(GateKind::Not, ba, ba);
                self.imp(ab, nba)
            }
        }
    }
}

/// Rewrites every gate into the given basis, preserving ports.
pub fn to_basis(n: &Netlist, basis: Basis) -> Netlist {
    let mut b = Builder { out: Netlist::new(n.inputs.clone()), zero: None };
    let mut map: Vec<Wire> = Vec::with_capacity(n.gates.len());
    let tr = |w: Wire, map: &Vec<Wire>| match w {
        Wire::Input(i) => Wire::Input(i),
        Wire::Gate(g) => map[g],
    };
    for g in &n.gates {
        let a = g.inputs.first().map(|&w| tr(w, &map)).unwrap_or(Wire::Input(0));
        let c = g.inputs.get(1).map(|&w| tr(w, &map)).unwrap_or(a);
        let w = match basis {
            Basis::Nand => b.nand_gate(g.kind, a, c),
            Basis::Impl => b.impl_gate(g.kind, a, c),
        };
        map.push(w);
    }
    for (name, w) in &n.outputs {
        let w = tr(*w, &map);
        b.out.output(name.clone(), w);
    }
    b.out
}

//! Gate-list circuits over the Clifford+Rz vocabulary, plus SWAP for routing.
//!
//! Qubit `i` of a circuit is bit `i` of a computational-basis index, the same
//! convention the Pauli-string letters use (leftmost letter = qubit 0).

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    /// Control, target.
    Cx(usize, usize),
    /// `Rz(phi) = diag(e^{-i phi/2}, e^{+i phi/2})`.
    Rz(usize, f64),
    Swap(usize, usize),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "h",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "sdg",
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::Cx(..) => "cx",
            Gate::Rz(..) => "rz",
            Gate::Swap(..) => "swap",
        }
    }

    /// First operand and, for two-qubit gates, the second.
    pub fn operands(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => {
                (q, None)
            }
            Gate::Rz(q, _) => (q, None),
            Gate::Cx(a, b) | Gate::Swap(a, b) => (a, Some(b)),
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let (a, b) = self.operands();
        std::iter::once(a).chain(b)
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cx(..) | Gate::Swap(..))
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Gate::Rz(..))
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::Rz(q, phi) => Gate::Rz(q, -phi),
            g => g,
        }
    }

    /// Same gate with every operand passed through `f`.
    pub fn map_qubits(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(f(q)),
            Gate::S(q) => Gate::S(f(q)),
            Gate::Sdg(q) => Gate::Sdg(f(q)),
            Gate::X(q) => Gate::X(f(q)),
            Gate::Y(q) => Gate::Y(f(q)),
            Gate::Z(q) => Gate::Z(f(q)),
            Gate::Cx(a, b) => Gate::Cx(f(a), f(b)),
            Gate::Rz(q, phi) => Gate::Rz(f(q), phi),
            Gate::Swap(a, b) => Gate::Swap(f(a), f(b)),
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
            }
        }
        if let (a, Some(b)) = self.operands() {
            if a == b {
                return Err(Error::RepeatedOperand(a));
            }
        }
        if let Gate::Rz(_, phi) = self {
            if !phi.is_finite() {
                return Err(Error::NonFiniteCoefficient(*phi));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Rz(q, phi) => write!(f, "rz({phi:?}) q[{q}];"),
            Gate::Cx(a, b) | Gate::Swap(a, b) => write!(f, "{} q[{a}],q[{b}];", self.name()),
            g => write!(f, "{} q[{}];", g.name(), g.operands().0),
        }
    }
}

impl Serialize for Gate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let len = if self.operands().1.is_some() || matches!(self, Gate::Rz(..)) {
            3
        } else {
            2
        };
        let mut seq = serializer.serialize_seq(Some(len))?;
        seq.serialize_element(self.name())?;
        match *self {
            Gate::Rz(q, phi) => {
                seq.serialize_element(&q)?;
                seq.serialize_element(&phi)?;
            }
            Gate::Cx(a, b) | Gate::Swap(a, b) => {
                seq.serialize_element(&a)?;
                seq.serialize_element(&b)?;
            }
            g => seq.serialize_element(&g.operands().0)?,
        }
        seq.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGate {
    One(String, usize),
    Pair(String, usize, usize),
    Angle(String, usize, f64),
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawGate::deserialize(deserializer)?;
        let gate = match raw {
            RawGate::One(name, q) => match name.to_ascii_lowercase().as_str() {
                "h" => Gate::H(q),
                "s" => Gate::S(q),
                "sdg" => Gate::Sdg(q),
                "x" => Gate::X(q),
                "y" => Gate::Y(q),
                "z" => Gate::Z(q),
                other => return Err(de::Error::custom(format!("unknown one-qubit gate {other:?}"))),
            },
            RawGate::Pair(name, a, b) => match name.to_ascii_lowercase().as_str() {
                "cx" | "cnot" => Gate::Cx(a, b),
                "swap" => Gate::Swap(a, b),
                // an integral angle also parses as a pair
                "rz" => Gate::Rz(a, b as f64),
                other => return Err(de::Error::custom(format!("unknown two-operand gate {other:?}"))),
            },
            RawGate::Angle(name, q, phi) => match name.to_ascii_lowercase().as_str() {
                "rz" => Gate::Rz(q, phi),
                other => return Err(de::Error::custom(format!("gate {other:?} takes no angle"))),
            },
        };
        Ok(gate)
    }
}

/// Depth, size and entangling-gate counts. SWAPs count as three CX.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub depth: usize,
    pub two_qubit_count: usize,
    pub total_gates: usize,
    pub single_qubit_count: usize,
    pub rz_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

#[derive(Deserialize)]
struct CircuitFile {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = CircuitFile::deserialize(deserializer)?;
        Circuit::from_gates(file.num_qubits, file.gates).map_err(de::Error::custom)
    }
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit { num_qubits, gates: Vec::new() }
    }

    pub fn from_gates(num_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(num_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends gates whose operands are already known to be valid.
    pub(crate) fn push_unchecked(&mut self, gate: Gate) {
        debug_assert!(gate.validate(self.num_qubits).is_ok(), "{gate:?}");
        self.gates.push(gate);
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits > self.num_qubits {
            return Err(Error::QubitCountMismatch { left: self.num_qubits, right: other.num_qubits });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// Same gates on a register of `num_qubits >= self.num_qubits()` qubits.
    pub fn widened(&self, num_qubits: usize) -> Result<Circuit> {
        if num_qubits < self.num_qubits {
            return Err(Error::QubitCountMismatch { left: num_qubits, right: self.num_qubits });
        }
        Ok(Circuit { num_qubits, gates: self.gates.clone() })
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Replaces every SWAP by three CX gates.
    pub fn expand_swaps(&self) -> Circuit {
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            match *g {
                Gate::Swap(a, b) => gates.extend([Gate::Cx(a, b), Gate::Cx(b, a), Gate::Cx(a, b)]),
                g => gates.push(g),
            }
        }
        Circuit { num_qubits: self.num_qubits, gates }
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cx(..))).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates
            .iter()
            .map(|g| match g {
                Gate::Cx(..) => 1,
                Gate::Swap(..) => 3,
                _ => 0,
            })
            .sum()
    }

    pub fn single_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.is_two_qubit()).count()
    }

    /// Longest path through the gate DAG, with SWAPs expanded to three layers.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        for g in &self.gates {
            match g.operands() {
                (q, None) => level[q] += 1,
                (a, Some(b)) => {
                    let layers = if matches!(g, Gate::Swap(..)) { 3 } else { 1 };
                    let l = level[a].max(level[b]) + layers;
                    level[a] = l;
                    level[b] = l;
                }
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    pub fn metrics(&self) -> CircuitMetrics {
        let two_qubit_count = self.two_qubit_count();
        let single_qubit_count = self.single_qubit_count();
        CircuitMetrics {
            depth: self.depth(),
            two_qubit_count,
            total_gates: two_qubit_count + single_qubit_count,
            single_qubit_count,
            rz_count: self.gates.iter().filter(|g| matches!(g, Gate::Rz(..))).count(),
        }
    }

    /// OpenQASM-2-flavoured text, one gate per line.
    pub fn to_qasm(&self) -> String {
        let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        out.push_str(&format!("qreg q[{}];\n", self.num_qubits));
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization is infallible")
    }

    pub fn from_json_str(text: &str) -> Result<Circuit> {
        Ok(serde_json::from_str(text)?)
    }
}

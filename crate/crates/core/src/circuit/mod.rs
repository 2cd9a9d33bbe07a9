//! Gate-level circuit representation, its text serialization, unitary
//! extraction and the ancilla-mediated evolution compiler.

mod compile;
mod unitary;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use compile::{
    compile_evolution, entangler, BlockForm, induced_system_unitary, model_circuit, term_evolution,
    AncillaState, EvolutionCircuit, InitialState, ZzStyle,
};
pub use unitary::{apply_gate, circuit_unitary, MAX_UNITARY_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    S(usize),
    Sdg(usize),
    /// `exp(-i theta X / 2)`.
    Rx(usize, f64),
    /// `exp(-i theta Z / 2)`.
    Rz(usize, f64),
    Cnot {
        control: usize,
        target: usize,
    },
    /// `diag(1, 1, 1, e^{i phi})`.
    Cp(usize, usize, f64),
    Measure {
        qubit: usize,
        cbit: usize,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q)
            | Gate::X(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::Rx(q, _)
            | Gate::Rz(q, _)
            | Gate::Measure { qubit: q, .. } => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cp(a, b, _) => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::Cp(..))
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Gate::Measure { .. })
    }

    /// The inverse gate; measurements have none.
    pub fn inverse(&self) -> Option<Gate> {
        Some(match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::Rx(q, a) => Gate::Rx(q, -a),
            Gate::Rz(q, a) => Gate::Rz(q, -a),
            Gate::Cp(a, b, phi) => Gate::Cp(a, b, -phi),
            Gate::Measure { .. } => return None,
            g => g,
        })
    }

    /// Same gate acting on relabelled qubits.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(f(q)),
            Gate::X(q) => Gate::X(f(q)),
            Gate::S(q) => Gate::S(f(q)),
            Gate::Sdg(q) => Gate::Sdg(f(q)),
            Gate::Rx(q, a) => Gate::Rx(f(q), a),
            Gate::Rz(q, a) => Gate::Rz(f(q), a),
            Gate::Cnot { control, target } => Gate::Cnot {
                control: f(control),
                target: f(target),
            },
            Gate::Cp(a, b, phi) => Gate::Cp(f(a), f(b), phi),
            Gate::Measure { qubit, cbit } => Gate::Measure {
                qubit: f(qubit),
                cbit,
            },
        }
    }

    fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, a) | Gate::Rz(_, a) | Gate::Cp(_, _, a) => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::X(q) => write!(f, "X {q}"),
            Gate::S(q) => write!(f, "S {q}"),
            Gate::Sdg(q) => write!(f, "SDG {q}"),
            Gate::Rx(q, a) => write!(f, "RX {q} {a:?}"),
            Gate::Rz(q, a) => write!(f, "RZ {q} {a:?}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::Cp(a, b, phi) => write!(f, "CP {a} {b} {phi:?}"),
            Gate::Measure { qubit, cbit } => write!(f, "MEASURE {qubit} {cbit}"),
        }
    }
}

/// An ordered gate list on `n_qubits` qubits (system links first, then ancillas).
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    ancillas: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            ancillas: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn ancillas(&self) -> &[usize] {
        &self.ancillas
    }

    pub fn mark_ancilla(&mut self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::InvalidGate(format!("ancilla {q} out of range")));
        }
        if !self.ancillas.contains(&q) {
            self.ancillas.push(q);
            self.ancillas.sort_unstable();
        }
        Ok(())
    }

    /// Appends a gate after checking indices, angles and measurement finality.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qubits = gate.qubits();
        if let Some(&q) = qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::InvalidGate(format!(
                "{gate}: qubit {q} out of range for {} qubits",
                self.n_qubits
            )));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::InvalidGate(format!("{gate}: repeated qubit")));
        }
        if gate.angle().is_some_and(|a| !a.is_finite()) {
            return Err(Error::InvalidGate(format!("{gate}: non-finite angle")));
        }
        let measured = self.gates.iter().any(|g| match g {
            Gate::Measure { qubit, .. } => qubits.contains(qubit),
            _ => false,
        });
        if measured {
            return Err(Error::InvalidGate(format!(
                "{gate}: qubit already measured"
            )));
        }
        if let Gate::Measure { cbit, .. } = gate {
            if self.measurements().iter().any(|&(_, c)| c == cbit) {
                return Err(Error::InvalidGate(format!("{gate}: classical bit reused")));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        for &g in &other.gates {
            self.push(g)?;
        }
        for &a in &other.ancillas {
            self.mark_ancilla(a)?;
        }
        Ok(())
    }

    /// Reversed gate order with every gate inverted.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut out = Circuit::new(self.n_qubits);
        out.ancillas = self.ancillas.clone();
        for g in self.gates.iter().rev() {
            out.gates.push(g.inverse().ok_or(Error::MeasurementPresent)?);
        }
        Ok(out)
    }

    /// `(qubit, cbit)` for every measurement, in gate order.
    pub fn measurements(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter_map(|g| match *g {
                Gate::Measure { qubit, cbit } => Some((qubit, cbit)),
                _ => None,
            })
            .collect()
    }

    pub fn n_cbits(&self) -> usize {
        self.measurements()
            .iter()
            .map(|&(_, c)| c + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(Gate::is_measurement)
    }

    /// The circuit with all measurements removed.
    pub fn without_measurements(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self
                .gates
                .iter()
                .copied()
                .filter(|g| !g.is_measurement())
                .collect(),
            ancillas: self.ancillas.clone(),
        }
    }

    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count()
    }

    pub fn metrics(&self) -> Metrics {
        metrics(self)
    }

    /// Line-oriented text form: a `qubits N` header, optional `ancilla q`
    /// lines, then one gate per line as `KIND qubits [angle]`.
    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.n_qubits);
        for a in &self.ancillas {
            s.push_str(&format!("ancilla {a}\n"));
        }
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |reason: String| Error::Parse {
                line: line_no,
                reason,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let kind = fields[0].to_ascii_uppercase();
            let int = |k: usize| -> Result<usize> {
                fields
                    .get(k)
                    .ok_or_else(|| parse_err(format!("{kind}: missing operand {k}")))?
                    .parse::<usize>()
                    .map_err(|e| parse_err(format!("{kind}: {e}")))
            };
            let real = |k: usize| -> Result<f64> {
                fields
                    .get(k)
                    .ok_or_else(|| parse_err(format!("{kind}: missing angle")))?
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("{kind}: {e}")))
            };
            let arity = match kind.as_str() {
                "QUBITS" | "ANCILLA" | "H" | "X" | "S" | "SDG" => 2,
                "RX" | "RZ" | "CNOT" | "MEASURE" => 3,
                "CP" => 4,
                _ => return Err(parse_err(format!("unknown gate {kind:?}"))),
            };
            if fields.len() != arity {
                return Err(parse_err(format!(
                    "{kind} takes {} operands, got {}",
                    arity - 1,
                    fields.len() - 1
                )));
            }
            if kind == "QUBITS" {
                if circuit.is_some() {
                    return Err(parse_err("duplicate qubits header".into()));
                }
                circuit = Some(Circuit::new(int(1)?));
                continue;
            }
            let c = circuit
                .as_mut()
                .ok_or_else(|| parse_err("missing qubits header".into()))?;
            let gate = match kind.as_str() {
                "ANCILLA" => {
                    c.mark_ancilla(int(1)?).map_err(|e| parse_err(e.to_string()))?;
                    continue;
                }
                "H" => Gate::H(int(1)?),
                "X" => Gate::X(int(1)?),
                "S" => Gate::S(int(1)?),
                "SDG" => Gate::Sdg(int(1)?),
                "RX" => Gate::Rx(int(1)?, real(2)?),
                "RZ" => Gate::Rz(int(1)?, real(2)?),
                "CNOT" => Gate::Cnot {
                    control: int(1)?,
                    target: int(2)?,
                },
                "CP" => Gate::Cp(int(1)?, int(2)?, real(3)?),
                "MEASURE" => Gate::Measure {
                    qubit: int(1)?,
                    cbit: int(2)?,
                },
                _ => unreachable!(),
            };
            c.push(gate).map_err(|e| parse_err(e.to_string()))?;
        }
        circuit.ok_or(Error::Parse {
            line: 0,
            reason: "empty circuit text".into(),
        })
    }
}

impl FromStr for Circuit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Circuit::from_text(s)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Metrics {
    pub cnot_count: usize,
    /// Number of layers of two-qubit gates; single-qubit gates add no depth.
    pub two_qubit_depth: usize,
    pub qubit_count: usize,
}

pub fn metrics(c: &Circuit) -> Metrics {
    let mut level = vec![0usize; c.n_qubits];
    let mut depth = 0;
    for g in &c.gates {
        if g.is_two_qubit() {
            let q = g.qubits();
            let l = level[q[0]].max(level[q[1]]) + 1;
            level[q[0]] = l;
            level[q[1]] = l;
            depth = depth.max(l);
        }
    }
    Metrics {
        cnot_count: c.cnot_count(),
        two_qubit_depth: depth,
        qubit_count: c.n_qubits,
    }
}

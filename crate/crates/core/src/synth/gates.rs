//! Gate lists and their text forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    S,
    Sdg,
    CZ,
    /// Qubits are `[control, target]`.
    CX,
    RX,
    RY,
    RZ,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::CZ | GateKind::CX => 2,
            _ => 1,
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ)
    }

    fn qasm_name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::CZ => "cz",
            GateKind::CX => "cx",
            GateKind::RX => "rx",
            GateKind::RY => "ry",
            GateKind::RZ => "rz",
        }
    }
}

/// One gate. Qubit `q` is bit `2^q` of the basis index; rotations are
/// `exp(−iθP/2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

impl Gate {
    pub fn ry(q: usize, theta: f64) -> Gate {
        Gate {
            kind: GateKind::RY,
            qubits: vec![q],
            angle: Some(theta),
        }
    }

    pub fn rz(q: usize, theta: f64) -> Gate {
        Gate {
            kind: GateKind::RZ,
            qubits: vec![q],
            angle: Some(theta),
        }
    }

    pub fn cz(a: usize, b: usize) -> Gate {
        Gate {
            kind: GateKind::CZ,
            qubits: vec![a, b],
            angle: None,
        }
    }

    pub fn cx(control: usize, target: usize) -> Gate {
        Gate {
            kind: GateKind::CX,
            qubits: vec![control, target],
            angle: None,
        }
    }

    pub fn h(q: usize) -> Gate {
        Gate {
            kind: GateKind::H,
            qubits: vec![q],
            angle: None,
        }
    }

    /// The same gate with every qubit index raised by `by`.
    pub fn shifted(&self, by: usize) -> Gate {
        Gate {
            kind: self.kind,
            qubits: self.qubits.iter().map(|q| q + by).collect(),
            angle: self.angle,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::InvalidArgument(format!(
                "{:?} takes {} qubit(s)",
                self.kind,
                self.kind.arity()
            )));
        }
        if let Some(q) = self.qubits.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::InvalidArgument(format!(
                "qubit {q} out of range for {n_qubits} qubits"
            )));
        }
        if self.kind.arity() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::InvalidArgument("two-qubit gate on a single qubit".into()));
        }
        if self.kind.is_rotation() != self.angle.is_some() {
            return Err(Error::InvalidArgument(format!(
                "{:?}: angle presence mismatch",
                self.kind
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GateList {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    /// Label of the synthesis step that emitted each gate.
    #[serde(default)]
    pub provenance: Vec<String>,
}

impl GateList {
    pub fn new(n_qubits: usize) -> Self {
        GateList {
            n_qubits,
            gates: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate, label: &str) {
        self.gates.push(gate);
        self.provenance.push(label.to_string());
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>, label: &str) {
        for g in gates {
            self.push(g, label);
        }
    }

    pub fn rotation_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.is_rotation()).count()
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.validate(self.n_qubits))
    }

    pub fn to_qasm(&self) -> String {
        let mut s = String::new();
        s.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(s, "qreg q[{}];", self.n_qubits);
        for g in &self.gates {
            let args: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
            match g.angle {
                Some(a) => {
                    let _ = writeln!(s, "{}({:.17e}) {};", g.kind.qasm_name(), a, args.join(","));
                }
                None => {
                    let _ = writeln!(s, "{} {};", g.kind.qasm_name(), args.join(","));
                }
            }
        }
        s
    }

    /// Applies the list to a real vector. Fails on gates with complex entries.
    pub fn apply_real(&self, psi: &mut [f64]) -> Result<()> {
        if psi.len() != 1usize << self.n_qubits {
            return Err(Error::InvalidArgument("vector length does not match register".into()));
        }
        for g in &self.gates {
            g.validate(self.n_qubits)?;
            match g.kind {
                GateKind::RY => {
                    let bit = 1usize << g.qubits[0];
                    let (s, c) = (0.5 * g.angle.unwrap()).sin_cos();
                    for i in 0..psi.len() {
                        if i & bit == 0 {
                            let (a, b) = (psi[i], psi[i | bit]);
                            psi[i] = c * a - s * b;
                            psi[i | bit] = s * a + c * b;
                        }
                    }
                }
                GateKind::H => {
                    let bit = 1usize << g.qubits[0];
                    let r = std::f64::consts::FRAC_1_SQRT_2;
                    for i in 0..psi.len() {
                        if i & bit == 0 {
                            let (a, b) = (psi[i], psi[i | bit]);
                            psi[i] = r * (a + b);
                            psi[i | bit] = r * (a - b);
                        }
                    }
                }
                GateKind::CZ => {
                    let m = (1usize << g.qubits[0]) | (1usize << g.qubits[1]);
                    psi.iter_mut()
                        .enumerate()
                        .filter(|(i, _)| i & m == m)
                        .for_each(|(_, v)| *v = -*v);
                }
                GateKind::CX => {
                    let c = 1usize << g.qubits[0];
                    let t = 1usize << g.qubits[1];
                    for i in 0..psi.len() {
                        if i & c != 0 && i & t == 0 {
                            psi.swap(i, i | t);
                        }
                    }
                }
                other => {
                    return Err(Error::UnsupportedConfiguration(format!("{other:?} is not a real gate")));
                }
            }
        }
        Ok(())
    }

    /// Dense real unitary, column `j` being the image of basis state `j`.
    pub fn real_unitary(&self) -> Result<super::linalg::Mat> {
        if self.n_qubits > 12 {
            return Err(Error::Capacity("dense unitary limited to 12 qubits".into()));
        }
        let dim = 1usize << self.n_qubits;
        let mut m = super::linalg::Mat::zeros(dim, dim);
        for j in 0..dim {
            let mut v = vec![0.0; dim];
            v[j] = 1.0;
            self.apply_real(&mut v)?;
            for i in 0..dim {
                m[(i, j)] = v[i];
            }
        }
        Ok(m)
    }
}

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::synth::{GateKind, GateList};
use crate::MAX_QUBITS;

/// Complex amplitudes of `n_qubits` qubits; qubit `q` is bit `2^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub n_qubits: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{n_qubits} qubits exceed the {MAX_QUBITS}-qubit limit"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amplitudes })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        let n = crate::log2_exact(amps.len())
            .ok_or_else(|| Error::InvalidArgument(format!("length {} is not a power of two", amps.len())))?;
        Ok(StateVector {
            n_qubits: n,
            amplitudes: amps.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let (a, b) = (self.amplitudes[i], self.amplitudes[i | bit]);
                self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
                self.amplitudes[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }
}

/// Applies the gates in order. The norm is not renormalized.
pub fn run_circuit(gates: &GateList, initial: &StateVector) -> Result<StateVector> {
    if gates.n_qubits != initial.n_qubits {
        return invalid(format!(
            "circuit has {} qubits but the state has {}",
            gates.n_qubits, initial.n_qubits
        ));
    }
    gates.validate()?;
    let mut s = initial.clone();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for g in &gates.gates {
        let q = g.qubits[0];
        match g.kind {
            GateKind::H => {
                let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                s.single(q, [[r, r], [r, -r]]);
            }
            GateKind::S => s.single(q, [[one, zero], [zero, i]]),
            GateKind::Sdg => s.single(q, [[one, zero], [zero, -i]]),
            GateKind::RX => {
                let (sn, c) = (0.5 * g.angle.unwrap()).sin_cos();
                s.single(q, [[c.into(), -i * sn], [-i * sn, c.into()]]);
            }
            GateKind::RY => {
                let (sn, c) = (0.5 * g.angle.unwrap()).sin_cos();
                s.single(q, [[c.into(), (-sn).into()], [sn.into(), c.into()]]);
            }
            GateKind::RZ => {
                let h = 0.5 * g.angle.unwrap();
                s.single(
                    q,
                    [
                        [Complex64::from_polar(1.0, -h), zero],
                        [zero, Complex64::from_polar(1.0, h)],
                    ],
                );
            }
            GateKind::CZ => {
                let m = (1usize << g.qubits[0]) | (1usize << g.qubits[1]);
                for (k, a) in s.amplitudes.iter_mut().enumerate() {
                    if k & m == m {
                        *a = -*a;
                    }
                }
            }
            GateKind::CX => {
                let c = 1usize << g.qubits[0];
                let t = 1usize << g.qubits[1];
                for k in 0..s.amplitudes.len() {
                    if k & c != 0 && k & t == 0 {
                        s.amplitudes.swap(k, k | t);
                    }
                }
            }
        }
    }
    Ok(s)
}

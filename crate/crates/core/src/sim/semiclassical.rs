//! Semiclassical phase estimation driven by the MPS blocks.
//!
//! The control register is never held in full. Block `k` finalizes the
//! control qubit at position `k` (the bit of weight `2^(n−1−k)`), which then
//! receives its phase kickback and dither, the classically controlled
//! correction from the outcomes so far, a Hadamard, and is measured. The
//! first measurement is the least significant bit of the outcome.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mps::{MBlock, MTensorView};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SemiclassicalMode {
    /// Follow every measurement branch with its probability.
    ExactBranch,
    Sampled {
        shots: u64,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalResult {
    pub n_qubits: usize,
    pub phase: f64,
    pub dither: f64,
    pub mode: SemiclassicalMode,
    /// Outcome probabilities (exact) or frequencies (sampled), indexed by `l`.
    pub distribution: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
    /// Most control qubits alive at any one time.
    pub peak_live_qubits: usize,
}

/// Live qubits, ordered by position; `live[0]` is the local MSB.
#[derive(Clone, Debug)]
struct Register {
    live: Vec<usize>,
    amps: Vec<Complex64>,
}

impl Register {
    fn new() -> Self {
        Register {
            live: Vec::new(),
            amps: vec![Complex64::new(1.0, 0.0)],
        }
    }

    fn bit(&self, pos: usize) -> usize {
        let rank = self.live.iter().position(|&p| p == pos).expect("qubit is live");
        self.live.len() - 1 - rank
    }

    fn add_fresh(&mut self, pos: usize) {
        let rank = self.live.iter().position(|&p| p > pos).unwrap_or(self.live.len());
        let below = self.live.len() - rank;
        self.live.insert(rank, pos);
        let mut next = vec![Complex64::new(0.0, 0.0); self.amps.len() * 2];
        for (i, a) in self.amps.iter().enumerate() {
            let lo = i & ((1 << below) - 1);
            let hi = i >> below;
            next[(hi << (below + 1)) | lo] = *a;
        }
        self.amps = next;
    }

    fn apply_block(&mut self, b: &MBlock) {
        let w = b.width();
        let anc = w - b.input_width();
        // Block positions are consecutive, so their local bits are too.
        let shift = self.bit(b.first_position + w - 1);
        let mask = ((1usize << w) - 1) << shift;
        let mut sub = vec![Complex64::new(0.0, 0.0); b.in_dim];
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (c, v) in sub.iter_mut().enumerate() {
                *v = self.amps[base | ((c << anc) << shift)];
            }
            for r in 0..b.out_dim {
                let row = &b.matrix[r * b.in_dim..(r + 1) * b.in_dim];
                self.amps[base | (r << shift)] = row.iter().zip(&sub).map(|(x, y)| *y * *x).sum();
            }
        }
    }

    fn phase(&mut self, pos: usize, angle: f64) {
        let bit = 1usize << self.bit(pos);
        let f = Complex64::from_polar(1.0, angle);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= f;
            }
        }
    }

    fn hadamard(&mut self, pos: usize) {
        let bit = 1usize << self.bit(pos);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = (a + b) * r;
                self.amps[i | bit] = (a - b) * r;
            }
        }
    }

    /// Splits on the value of `pos`, dropping it from the register.
    /// Returns `(probability, normalized state)` for outcomes 0 and 1.
    fn measure(&self, pos: usize) -> [(f64, Register); 2] {
        let b = self.bit(pos);
        let rank = self.live.iter().position(|&p| p == pos).unwrap();
        let mut live = self.live.clone();
        live.remove(rank);
        let mut out = [(0.0, Register::new()), (0.0, Register::new())];
        for (v, slot) in out.iter_mut().enumerate() {
            let amps: Vec<Complex64> = (0..self.amps.len() / 2)
                .map(|i| {
                    let lo = i & ((1 << b) - 1);
                    let hi = i >> b;
                    self.amps[(hi << (b + 1)) | (v << b) | lo]
                })
                .collect();
            let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            let s = if p > 0.0 { 1.0 / p.sqrt() } else { 0.0 };
            *slot = (
                p,
                Register {
                    live: live.clone(),
                    amps: amps.into_iter().map(|a| a * s).collect(),
                },
            );
        }
        out
    }
}

struct Run<'a> {
    view: &'a MTensorView,
    theta: f64,
    peak: usize,
}

impl Run<'_> {
    /// Prepares block `k` and rotates its finished qubit into the measurement
    /// basis, given the outcome bits `l` gathered so far.
    fn step(&mut self, reg: &mut Register, k: usize, l: u64) {
        let n = self.view.n_qubits;
        let b = &self.view.blocks[k];
        for p in b.first_position + b.input_width()..b.first_position + b.width() {
            reg.add_fresh(p);
        }
        self.peak = self.peak.max(reg.live.len());
        reg.apply_block(b);
        let j = n - 1 - k;
        let kick = (self.theta * (1u64 << j) as f64).rem_euclid(2.0 * PI);
        // Outcome bits l_0..l_{k−1} are known; correct by −2π·l/2^(k+1).
        let corr = -2.0 * PI * l as f64 / (1u64 << (k + 1)) as f64;
        reg.phase(k, kick + corr);
        reg.hadamard(k);
    }

    fn branch(&mut self, reg: Register, k: usize, l: u64, prob: f64, dist: &mut [f64]) {
        if prob == 0.0 {
            return;
        }
        if k == self.view.n_qubits {
            dist[l as usize] += prob;
            return;
        }
        let mut reg = reg;
        self.step(&mut reg, k, l);
        let [(p0, r0), (p1, r1)] = reg.measure(k);
        self.branch(r0, k + 1, l, prob * p0, dist);
        self.branch(r1, k + 1, l | (1 << k), prob * p1, dist);
    }
}

/// Runs semiclassical phase estimation on the state described by `view`
/// with eigenphase `phi` and dither `dither`.
///
/// `window_dim` is the length of the window the view encodes; it must fill
/// the register (`2^n`), since the semiclassical circuit has no room for
/// post-selection.
pub fn semiclassical_run(
    view: &MTensorView,
    window_dim: usize,
    phi: f64,
    dither: f64,
    mode: SemiclassicalMode,
) -> Result<SemiclassicalResult> {
    let n = view.n_qubits;
    if n == 0 || n > 40 {
        return invalid(format!("unsupported register size {n}"));
    }
    if window_dim != 1usize << n {
        return Err(Error::UnsupportedConfiguration(format!(
            "window length {window_dim} must equal 2^{n}; padded windows need the full-register estimator"
        )));
    }
    if view.max_block_width() > 3 {
        return Err(Error::UnsupportedConfiguration(
            "semiclassical runs keep at most three live control qubits (bond dimension ≤ 4)".into(),
        ));
    }
    let lim = PI / (1u64 << n) as f64;
    if !(dither > -lim && dither <= lim) {
        return invalid(format!("dither must lie in (−π/N, π/N], got {dither}"));
    }
    let mut run = Run {
        view,
        theta: phi + dither,
        peak: 0,
    };
    match mode {
        SemiclassicalMode::ExactBranch => {
            if n > 20 {
                return Err(Error::Capacity("exact branching limited to 20 qubits".into()));
            }
            let mut dist = vec![0.0; 1 << n];
            run.branch(Register::new(), 0, 0, 1.0, &mut dist);
            Ok(SemiclassicalResult {
                n_qubits: n,
                phase: phi,
                dither,
                mode,
                distribution: dist,
                counts: None,
                peak_live_qubits: run.peak,
            })
        }
        SemiclassicalMode::Sampled { shots, seed } => {
            if shots == 0 {
                return invalid("shot count must be positive");
            }
            if n > 26 {
                return Err(Error::Capacity(
                    "sampled runs record outcomes for at most 26 qubits".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts = vec![0u64; 1 << n];
            for _ in 0..shots {
                let mut reg = Register::new();
                let mut l = 0u64;
                for k in 0..n {
                    run.step(&mut reg, k, l);
                    let [(p0, r0), (_, r1)] = reg.measure(k);
                    if rng.random::<f64>() < p0 {
                        reg = r0;
                    } else {
                        reg = r1;
                        l |= 1 << k;
                    }
                }
                counts[l as usize] += 1;
            }
            let distribution = counts.iter().map(|&c| c as f64 / shots as f64).collect();
            Ok(SemiclassicalResult {
                n_qubits: n,
                phase: phi,
                dither,
                mode,
                distribution,
                counts: Some(counts),
                peak_live_qubits: run.peak,
            })
        }
    }
}

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::synth::{Gate, GateList};

/// Maps an angle into `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Register size used for a control state: the next power of two.
fn register_len(control: &[f64]) -> usize {
    control.len().next_power_of_two()
}

/// `Γ(x) = N^{−1/2}·Σ_k γ_k·e^{ikx}`, the amplitude of an estimate off by `x`.
pub fn gamma(control: &[f64], x: f64) -> Complex64 {
    let scale = 1.0 / (register_len(control) as f64).sqrt();
    control
        .iter()
        .enumerate()
        .map(|(k, &g)| Complex64::from_polar(g, k as f64 * x))
        .sum::<Complex64>()
        * scale
}

/// Density of the phase error `Δφ` once dithering has smoothed the output:
/// `(N/2π)·|Γ(Δφ)|²`, which integrates to one over a period.
pub fn error_density(control: &[f64], x: f64) -> f64 {
    register_len(control) as f64 / (2.0 * PI) * gamma(control, x).norm_sqr()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpeDistribution {
    pub n_qubits: usize,
    pub phase: f64,
    pub dither: f64,
    /// Probability of reading out `l`, for `l = 0..N`.
    pub probabilities: Vec<f64>,
}

impl QpeDistribution {
    /// The phase estimate reported for outcome `l`.
    pub fn estimate(&self, l: usize) -> f64 {
        let n = self.probabilities.len() as f64;
        wrap_phase(2.0 * PI * l as f64 / n - self.dither)
    }

    /// Probability that the estimate lands within `d` of the true phase.
    pub fn confidence(&self, d: f64) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(l, _)| wrap_phase(self.phase - self.estimate(*l)).abs() <= d)
            .map(|(_, p)| p)
            .sum()
    }
}

fn check_dither(dither: f64, n: usize) -> Result<()> {
    let lim = PI / n as f64;
    if !(dither > -lim && dither <= lim) {
        return invalid(format!(
            "dither must lie in (−π/N, π/N] = (−{lim}, {lim}], got {dither}"
        ));
    }
    Ok(())
}

/// Output distribution of textbook phase estimation with control state
/// `control` (zero-padded to a power of two), eigenphase `phi` and dither
/// phase `dither`: `Pr(l) = |Γ(φ + φ̃ − 2πl/N)|²`.
pub fn qpe_distribution(control: &[f64], phi: f64, dither: f64) -> Result<QpeDistribution> {
    if control.is_empty() {
        return invalid("control state is empty");
    }
    crate::check_unit_norm(control, "control state")?;
    let n = register_len(control);
    check_dither(dither, n)?;
    let theta = phi + dither;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let g = control.get(k).copied().unwrap_or(0.0);
            Complex64::from_polar(g, wrap_phase(theta * k as f64))
        })
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(QpeDistribution {
        n_qubits: n.trailing_zeros() as usize,
        phase: phi,
        dither,
        probabilities: buf.iter().map(|a| a.norm_sqr() * scale).collect(),
    })
}

/// Per-qubit dither rotations: `R_z(2^j·φ̃)` on qubit `j`. Up to a global
/// phase they multiply basis state `k` by `e^{iφ̃k}`.
pub fn dither_gates(n_qubits: usize, dither: f64) -> Result<GateList> {
    check_dither(dither, 1 << n_qubits)?;
    let mut g = GateList::new(n_qubits);
    for j in 0..n_qubits {
        g.push(Gate::rz(j, dither * (1u64 << j) as f64), "dither");
    }
    Ok(g)
}

/// Phase-error density averaged over `grid` evenly spaced dither values.
///
/// Each (dither, outcome) pair contributes its probability at the error
/// `φ − φ̂`; together they tile the circle with spacing `2π/(N·grid)`.
/// Returns `(Δφ, density)` sorted by `Δφ`.
pub fn dithered_error_density(control: &[f64], phi: f64, grid: usize) -> Result<Vec<(f64, f64)>> {
    if grid == 0 {
        return invalid("dither grid must be non-empty");
    }
    let n = register_len(control);
    let step = 2.0 * PI / (n as f64 * grid as f64);
    let mut out = Vec::with_capacity(n * grid);
    for m in 0..grid {
        let dither = -PI / n as f64 + (m + 1) as f64 * step;
        let dist = qpe_distribution(control, phi, dither)?;
        for (l, &p) in dist.probabilities.iter().enumerate() {
            let err = wrap_phase(phi - dist.estimate(l));
            // Each sample carries weight p/grid over a cell of width `step`.
            out.push((err, p / grid as f64 / step));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}

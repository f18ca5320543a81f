//! DPSS windows: construction, half-width solving and padding.
//!
//! A window of length `D` and half-width `d` is the unit-norm top eigenvector
//! of the concentration operator `S(d)` (see [`crate::toeplitz`]). It is
//! computed from the commuting tridiagonal matrix, whose top eigenvector is
//! the same but which is cheap and well conditioned to diagonalize.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::toeplitz::{kernel, linear_convolve, ToeplitzOp};
use crate::tridiag;

/// Residual bound `‖S·γ − λ·γ‖` accepted for a computed window.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Tolerance on `|λ − (1 − δ)|` reached by [`solve_halfwidth`].
pub const SOLVE_TOL: f64 = 1e-12;

const SOLVE_MAX_ITER: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpssWindow {
    pub dim: usize,
    pub halfwidth: f64,
    /// `⟨γ|S(d)|γ⟩`. Equal to the top eigenvalue for standard windows.
    pub eigenvalue: f64,
    pub amplitudes: Vec<f64>,
}

impl DpssWindow {
    /// One minus the concentration: the failure probability of the window.
    pub fn delta(&self) -> f64 {
        1.0 - self.eigenvalue
    }
}

/// How the half-width of a solved window maps onto the eigenproblem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// The window is the top eigenvector of `S(d)` itself.
    #[default]
    Standard,
    /// Compatibility mode: the window is the top eigenvector of `S(2π·d)`,
    /// with `d` still solved from the standard eigenvalue condition. The
    /// embedded infidelity reference values follow this scaling.
    Reference,
}

fn check_halfwidth(d: f64) -> Result<()> {
    if !(d > 0.0 && d <= PI) || !d.is_finite() {
        return invalid(format!("half-width must lie in (0, π], got {d}"));
    }
    Ok(())
}

/// The top eigenvector of `S(d)` on `dim` points, normalized, with positive sum.
pub fn dpss_window(dim: usize, d: f64) -> Result<DpssWindow> {
    if dim == 0 {
        return invalid("window length must be positive");
    }
    check_halfwidth(d)?;
    if dim == 1 {
        return Ok(DpssWindow {
            dim,
            halfwidth: d,
            eigenvalue: d / PI,
            amplitudes: vec![1.0],
        });
    }
    if d == PI {
        // S(π) is the identity, every vector is optimal.
        let a = 1.0 / (dim as f64).sqrt();
        return Ok(DpssWindow {
            dim,
            halfwidth: d,
            eigenvalue: 1.0,
            amplitudes: vec![a; dim],
        });
    }

    let half = (dim as f64 - 1.0) / 2.0;
    let cw = d.cos();
    let diag: Vec<f64> = (0..dim).map(|i| (half - i as f64).powi(2) * cw).collect();
    let off: Vec<f64> = (1..dim).map(|i| (i as f64) * ((dim - i) as f64) / 2.0).collect();
    let (_, mut v) = tridiag::top_eigenvector(&diag, &off)?;

    // The top sequence is even; averaging with the reversal removes drift.
    let rev: Vec<f64> = v.iter().rev().copied().collect();
    v.iter_mut().zip(&rev).for_each(|(a, b)| *a = 0.5 * (*a + b));
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sum: f64 = v.iter().sum();
    let sign = if sum < 0.0 { -1.0 } else { 1.0 };
    v.iter_mut().for_each(|x| *x *= sign / nrm);

    let op = ToeplitzOp::concentration(dim, d);
    let sv = op.apply(&v);
    let lambda: f64 = v.iter().zip(&sv).map(|(a, b)| a * b).sum();
    let resid = sv
        .iter()
        .zip(&v)
        .map(|(s, x)| (s - lambda * x).powi(2))
        .sum::<f64>()
        .sqrt();
    if !(resid <= RESIDUAL_TOL) {
        return Err(Error::ComputationFailure(format!(
            "eigen-residual {resid:.3e} exceeds {RESIDUAL_TOL:e} (dim {dim}, d {d})"
        )));
    }
    Ok(DpssWindow {
        dim,
        halfwidth: d,
        eigenvalue: lambda,
        amplitudes: v,
    })
}

/// Largest eigenvalue of `S(d)` and its derivative in `d`.
fn eigenvalue_and_slope(dim: usize, d: f64) -> Result<(f64, f64, DpssWindow)> {
    let w = dpss_window(dim, d)?;
    let slope = if dim == 1 {
        1.0 / PI
    } else {
        ToeplitzOp::concentration_derivative(dim, d).quadratic_form(&w.amplitudes)
    };
    Ok((w.eigenvalue, slope, w))
}

/// Smallest half-width whose optimal window fails with probability `delta`.
///
/// Solves `λ_max(S(d)) = 1 − δ` by Newton steps on the eigenvalue (its
/// derivative is `⟨γ|∂S/∂d|γ⟩`), falling back to bisection of the bracket.
pub fn solve_halfwidth(dim: usize, delta: f64) -> Result<f64> {
    solve_halfwidth_window(dim, delta).map(|w| w.halfwidth)
}

/// [`solve_halfwidth`], also returning the window at the solution.
pub fn solve_halfwidth_window(dim: usize, delta: f64) -> Result<DpssWindow> {
    if dim == 0 {
        return invalid("window length must be positive");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("failure probability must lie in (0, 1), got {delta}"));
    }
    let target = 1.0 - delta;
    if dim == 1 {
        return dpss_window(1, PI * target);
    }

    let mut lo = 0.0f64;
    let mut hi = PI;
    let mut d = ((1.5 * (1.0 / delta).ln() + 0.5) / dim as f64).clamp(1e-300, 0.5 * PI);
    let mut best: Option<(f64, DpssWindow)> = None;
    for _ in 0..SOLVE_MAX_ITER {
        let (lam, slope, w) = eigenvalue_and_slope(dim, d)?;
        let f = lam - target;
        if best.as_ref().is_none_or(|(bf, _)| f.abs() < *bf) {
            best = Some((f.abs(), w));
        }
        if f.abs() <= 0.1 * SOLVE_TOL {
            break;
        }
        if f < 0.0 {
            lo = lo.max(d);
        } else {
            hi = hi.min(d);
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let newton = d - f / slope;
        d = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let (err, w) = best.expect("at least one iteration");
    if err > SOLVE_TOL {
        return Err(Error::ComputationFailure(format!(
            "half-width solve stalled at |λ − (1−δ)| = {err:.3e} (dim {dim}, δ {delta:e})"
        )));
    }
    Ok(w)
}

/// Window for failure probability `delta` under the given bandwidth mode.
pub fn window_for_delta(dim: usize, delta: f64, bandwidth: Bandwidth) -> Result<DpssWindow> {
    let w = solve_halfwidth_window(dim, delta)?;
    match bandwidth {
        Bandwidth::Standard => Ok(w),
        Bandwidth::Reference => {
            let d = w.halfwidth;
            let scaled = 2.0 * PI * d;
            if scaled > PI {
                return Err(Error::Domain(format!(
                    "reference bandwidth 2π·d = {scaled} exceeds π for dim {dim}, δ {delta:e}"
                )));
            }
            let mut r = dpss_window(dim, scaled)?;
            r.halfwidth = d;
            r.eigenvalue = ToeplitzOp::concentration(dim, d).quadratic_form(&r.amplitudes);
            Ok(r)
        }
    }
}

/// Kernel extension `(1/λ)·Σ_k K(j−k)·γ_k` at `j = start + stride·m`, `m < count`.
///
/// Splits the sum by residue of `k` modulo the stride so that each part is an
/// ordinary convolution; memory stays proportional to `dim/stride + count`.
pub fn extension_at_stride(window: &DpssWindow, start: i64, stride: usize, count: usize) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    let stride = stride.max(1);
    let d = window.halfwidth;
    let gamma = &window.amplitudes;
    let s = stride as i64;
    let parts: Vec<Vec<f64>> = (0..stride.min(gamma.len()))
        .into_par_iter()
        .map(|r| {
            let xs: Vec<f64> = gamma.iter().skip(r).step_by(stride).copied().collect();
            let q = xs.len() as i64;
            // y[m] = Σ_q K(start + s·m − r − s·q)·x[q] = Σ_q g[m − q + Q − 1]·x[q]
            let g: Vec<f64> = (0..(count as i64 + q - 1))
                .map(|u| kernel(d, start - r as i64 + s * (u - (q - 1))))
                .collect();
            let full = linear_convolve(&g, &xs);
            full[(q - 1) as usize..(q - 1) as usize + count].to_vec()
        })
        .collect();
    let mut out = vec![0.0; count];
    for p in parts {
        out.iter_mut().zip(&p).for_each(|(o, v)| *o += v);
    }
    let inv = 1.0 / window.eigenvalue;
    out.iter_mut().for_each(|v| *v *= inv);
    out
}

/// Kernel extension of the window over the contiguous index range `[start, start+len)`.
pub fn prolate_extension(window: &DpssWindow, start: i64, len: usize) -> Vec<f64> {
    extension_at_stride(window, start, 1, len)
}

/// How the exterior of a padded window is filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum PaddingRule {
    Zero,
    Prolate,
    /// Kernel extension sampled every `stride` points, linear in between.
    Interpolated {
        stride: usize,
    },
}

impl PaddingRule {
    /// Exact extension up to 16 qubits, sampled above that.
    pub fn default_for(n_qubits: usize) -> Self {
        if n_qubits <= 16 {
            PaddingRule::Prolate
        } else {
            PaddingRule::Interpolated {
                stride: 1 << (n_qubits - 16),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaddedWindow {
    pub n_qubits: usize,
    pub dim: usize,
    pub offset: usize,
    pub halfwidth: f64,
    pub rule: PaddingRule,
    /// Squared norm of the padded vector relative to the window's.
    pub norm_constant: f64,
    pub success_probability: f64,
    pub amplitudes: Vec<f64>,
}

impl PaddedWindow {
    /// The slice holding the (rescaled) window itself.
    pub fn window_slice(&self) -> &[f64] {
        &self.amplitudes[self.offset..self.offset + self.dim]
    }
}

/// Values of the extension on indices `first..=last` (relative to the window).
fn exterior_values(window: &DpssWindow, first: i64, last: i64, rule: PaddingRule) -> Vec<f64> {
    let len = (last - first + 1).max(0) as usize;
    match rule {
        PaddingRule::Zero => vec![0.0; len],
        PaddingRule::Prolate => prolate_extension(window, first, len),
        PaddingRule::Interpolated { stride } => {
            let s = stride.max(1) as i64;
            if s == 1 || len <= 2 {
                return prolate_extension(window, first, len);
            }
            // Sample points anchored at the window edge side so the nearest
            // exterior point is always exact.
            let anchor = if first < 0 { last } else { first };
            let steps = (len as i64 - 1 + s - 1) / s;
            let start = if first < 0 { anchor - steps * s } else { anchor };
            let samples = extension_at_stride(window, start, s as usize, steps as usize + 1);
            (first..=last)
                .map(|j| {
                    let t = (j - start) as f64 / s as f64;
                    let i = (t.floor() as usize).min(samples.len() - 2);
                    let frac = t - i as f64;
                    samples[i] * (1.0 - frac) + samples[i + 1] * frac
                })
                .collect()
        }
    }
}

/// Embeds the window in `2^n_qubits` amplitudes and renormalizes.
///
/// The window sits at `offset` (centered by default, rounding down). The
/// exterior follows `rule`. The success probability of post-selecting the
/// window region afterwards is `1/norm_constant`.
pub fn padded_window(
    window: &DpssWindow,
    n_qubits: usize,
    offset: Option<usize>,
    rule: PaddingRule,
) -> Result<PaddedWindow> {
    if n_qubits > crate::MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "2^{n_qubits} amplitudes exceed the 2^{} limit",
            crate::MAX_QUBITS
        )));
    }
    let total = 1usize << n_qubits;
    let dim = window.dim;
    if dim > total {
        return invalid(format!("window length {dim} exceeds 2^{n_qubits}"));
    }
    let gap = total - dim;
    let offset = offset.unwrap_or(gap / 2);
    if offset > gap {
        return invalid(format!("offset {offset} leaves no room for the window (max {gap})"));
    }
    let mut amps = vec![0.0; total];
    amps[offset..offset + dim].copy_from_slice(&window.amplitudes);
    if offset > 0 {
        let left = exterior_values(window, -(offset as i64), -1, rule);
        amps[..offset].copy_from_slice(&left);
    }
    let right_len = total - offset - dim;
    if right_len > 0 {
        let right = exterior_values(window, dim as i64, (dim + right_len) as i64 - 1, rule);
        amps[offset + dim..].copy_from_slice(&right);
    }
    let norm_constant: f64 = amps.iter().map(|x| x * x).sum();
    let scale = 1.0 / norm_constant.sqrt();
    amps.iter_mut().for_each(|x| *x *= scale);
    Ok(PaddedWindow {
        n_qubits,
        dim,
        offset,
        halfwidth: window.halfwidth,
        rule,
        norm_constant,
        success_probability: 1.0 / norm_constant,
        amplitudes: amps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::dense_matrix;
    use nalgebra::DMatrix;

    fn dense_top(dim: usize, d: f64) -> (f64, Vec<f64>) {
        let m = DMatrix::from_row_slice(dim, dim, &dense_matrix(dim, d));
        let eig = m.symmetric_eigen();
        let (i, &lam) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        (lam, v)
    }

    #[test]
    fn agrees_with_dense_eigensolver() {
        for &(dim, d) in &[(2usize, 0.3), (5, 1.0), (16, 0.2), (33, 0.05), (64, 0.4)] {
            let w = dpss_window(dim, d).unwrap();
            let (lam, v) = dense_top(dim, d);
            assert!((w.eigenvalue - lam).abs() < 1e-12, "dim {dim}");
            let dot: f64 = v.iter().zip(&w.amplitudes).map(|(a, b)| a * b).sum();
            assert!(1.0 - dot < 1e-12, "dim {dim}: overlap {dot}");
        }
    }

    #[test]
    fn degenerate_cases() {
        let w = dpss_window(1, 0.7).unwrap();
        assert_eq!(w.amplitudes, vec![1.0]);
        assert!((w.eigenvalue - 0.7 / PI).abs() < 1e-15);
        let u = dpss_window(8, PI).unwrap();
        assert!(u.amplitudes.iter().all(|a| (a - 8f64.sqrt().recip()).abs() < 1e-15));
        assert!(dpss_window(0, 0.1).is_err());
        assert!(dpss_window(4, 0.0).is_err());
        assert!(dpss_window(4, 3.2).is_err());
    }

    #[test]
    fn solve_hits_target() {
        for &dim in &[1usize, 2, 7, 64, 300] {
            for &delta in &[1e-1, 1e-2, 1e-4, 1e-8] {
                let w = solve_halfwidth_window(dim, delta).unwrap();
                assert!((w.eigenvalue - (1.0 - delta)).abs() <= SOLVE_TOL, "dim {dim} δ {delta}");
            }
        }
        assert!(solve_halfwidth(4, 0.0).is_err());
        assert!(solve_halfwidth(4, 1.0).is_err());
    }

    #[test]
    fn extension_reproduces_interior() {
        let w = dpss_window(40, 0.3).unwrap();
        let ext = prolate_extension(&w, 0, 40);
        for (a, b) in ext.iter().zip(&w.amplitudes) {
            assert!((a - b).abs() < 1e-12);
        }
        let strided = extension_at_stride(&w, -37, 5, 9);
        for m in 0..9 {
            let j = -37 + 5 * m as i64;
            let direct: f64 = (0..40)
                .map(|k| kernel(0.3, j - k) * w.amplitudes[k as usize])
                .sum::<f64>()
                / w.eigenvalue;
            assert!((strided[m] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolated_rule_tracks_exact() {
        let w = solve_halfwidth_window(300, 1e-3).unwrap();
        let exact = padded_window(&w, 9, None, PaddingRule::Prolate).unwrap();
        let interp = padded_window(&w, 9, None, PaddingRule::Interpolated { stride: 4 }).unwrap();
        let diff = exact
            .amplitudes
            .iter()
            .zip(&interp.amplitudes)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-4, "max deviation {diff}");
    }
}

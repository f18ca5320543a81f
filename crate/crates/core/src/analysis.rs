//! Confidence of arbitrary control states and confidence/half-width trade-offs.
//!
//! The confidence of a unit-norm state `ψ` at half-width `d` is `⟨ψ|S(d)|ψ⟩`,
//! the probability that the phase error lands in `[−d, d]`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check_unit_norm;
use crate::dpss::{dpss_window, padded_window, solve_halfwidth, DpssWindow, PaddingRule};
use crate::error::{invalid, Error, Result};
use crate::mps::Mps;
use crate::toeplitz::{kernel, ToeplitzOp};

/// Values this close outside `[0, 1]` are clamped rather than rejected.
const CLAMP_SLACK: f64 = 1e-12;

fn check_state_and_halfwidth(state: &[f64], d: f64) -> Result<()> {
    if state.is_empty() {
        return invalid("state is empty");
    }
    if !(d > 0.0 && d <= PI) {
        return invalid(format!("half-width must lie in (0, π], got {d}"));
    }
    check_unit_norm(state, "state")
}

fn clamp_probability(p: f64) -> Result<f64> {
    if !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&p) {
        return Err(Error::ComputationFailure(format!("confidence {p} outside [0, 1]")));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `⟨ψ|S(d)|ψ⟩` by FFT convolution.
pub fn confidence(state: &[f64], d: f64) -> Result<f64> {
    check_state_and_halfwidth(state, d)?;
    clamp_probability(ToeplitzOp::concentration(state.len(), d).quadratic_form(state))
}

/// `⟨ψ|S(d)|ψ⟩` by the direct double sum. Quadratic cost; a reference only.
pub fn confidence_brute_force(state: &[f64], d: f64) -> Result<f64> {
    check_state_and_halfwidth(state, d)?;
    let n = state.len();
    let mut acc = 0.0;
    for j in 0..n {
        let mut row = 0.0;
        for k in 0..n {
            row += kernel(d, j as i64 - k as i64) * state[k];
        }
        acc += state[j] * row;
    }
    clamp_probability(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceReport {
    pub label: String,
    pub halfwidth: f64,
    pub confidence: f64,
    pub delta: f64,
}

/// Confidence of each labelled state at a common half-width.
pub fn confidence_report(states: &[(String, Vec<f64>)], d: f64) -> Result<Vec<ConfidenceReport>> {
    states
        .iter()
        .map(|(label, s)| {
            let c = confidence(s, d)?;
            Ok(ConfidenceReport {
                label: label.clone(),
                halfwidth: d,
                confidence: c,
                delta: 1.0 - c,
            })
        })
        .collect()
}

/// Failure probabilities of a compressed state and of the window it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaComparison {
    pub delta_window: f64,
    pub delta_approx: f64,
    /// `(δ_approx − δ_window)/δ_window`.
    pub relative_increase: f64,
}

/// Relative increase of the failure probability of `approx` over `window`.
///
/// The difference is formed from the error vector `e = φ − γ` so that it
/// stays accurate when it is far below `δ` itself:
/// `δ_φ − δ_γ = −(⟨γ|(S−λ)γ⟩ + 2⟨e|(S−λ)γ⟩ + ⟨e|(S−λ)e⟩)`.
pub fn delta_comparison(approx: &[f64], window: &DpssWindow) -> Result<DeltaComparison> {
    if approx.len() != window.dim {
        return invalid(format!("length mismatch: {} vs {}", approx.len(), window.dim));
    }
    check_unit_norm(approx, "approximate state")?;
    let d = window.halfwidth;
    let lambda = window.eigenvalue;
    let gamma = &window.amplitudes;
    let op = ToeplitzOp::concentration(window.dim, d);

    let dot: f64 = approx.iter().zip(gamma).map(|(a, b)| a * b).sum();
    let sign = if dot < 0.0 { -1.0 } else { 1.0 };
    let e: Vec<f64> = approx.iter().zip(gamma).map(|(a, g)| sign * a - g).collect();

    let sg = op.apply(gamma);
    let resid: Vec<f64> = sg.iter().zip(gamma).map(|(s, g)| s - lambda * g).collect();
    let se = op.apply(&e);
    let ee: f64 = e.iter().map(|x| x * x).sum();
    let e_se: f64 = e.iter().zip(&se).map(|(a, b)| a * b).sum();
    let cross: f64 = e.iter().zip(&resid).map(|(a, b)| a * b).sum();
    let base: f64 = gamma.iter().zip(&resid).map(|(a, b)| a * b).sum();
    // The norm defect of φ enters at the 1e-16 level and is ignored.
    let diff = -(base + 2.0 * cross + (e_se - lambda * ee));

    let delta_window = 1.0 - lambda;
    Ok(DeltaComparison {
        delta_window,
        delta_approx: delta_window + diff,
        relative_increase: diff / delta_window,
    })
}

/// Shorthand for [`delta_comparison`]'s relative increase.
pub fn relative_delta_increase(approx: &[f64], window: &DpssWindow) -> Result<f64> {
    Ok(delta_comparison(approx, window)?.relative_increase)
}

/// The window as a bond-dimension-`chi` MPS would deliver it: padded to the
/// smallest register that holds it, compressed, expanded, and cut back to the
/// window region (renormalized).
pub fn compressed_window_state(window: &DpssWindow, chi: usize, rule: PaddingRule) -> Result<Vec<f64>> {
    let n = window.dim.next_power_of_two().trailing_zeros() as usize;
    let padded = padded_window(window, n, None, rule)?;
    let full = Mps::from_state(&padded.amplitudes, chi)?.to_state()?;
    let mut cut = full[padded.offset..padded.offset + window.dim].to_vec();
    let norm = cut.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::ComputationFailure(
            "compressed window region has zero weight".into(),
        ));
    }
    cut.iter_mut().for_each(|x| *x /= norm);
    Ok(cut)
}

/// Upper bound on `(δ_approx − δ)/δ` for a state of fidelity `fid` with the
/// optimal window of failure probability `delta`.
pub fn fidelity_delta_bound(fid: f64, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&fid) {
        return invalid(format!("fidelity must lie in [0, 1], got {fid}"));
    }
    bound_from_infidelity(1.0 - fid, delta)
}

/// [`fidelity_delta_bound`] taking the infidelity, which keeps precision
/// when the fidelity is within rounding of one.
pub fn bound_from_infidelity(infidelity: f64, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&infidelity) {
        return invalid(format!("infidelity must lie in [0, 1], got {infidelity}"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("failure probability must lie in (0, 1), got {delta}"));
    }
    let fid = 1.0 - infidelity;
    let x = infidelity * (1.0 - delta) / delta;
    Ok(x - infidelity + 2.0 * (fid * x).sqrt())
}

/// Whether the bound's derivation assumptions hold: `F > δ_window·δ_approx`.
pub fn bound_regime_holds(fid: f64, delta_window: f64, delta_approx: f64) -> bool {
    fid > delta_window * delta_approx
}

/// Whether `δ ≥ (1 + √F)/2`, where the general lower bound on the
/// compressed state's failure probability applies.
pub fn lower_bound_regime(fid: f64, delta: f64) -> bool {
    delta >= 0.5 * (1.0 + fid.sqrt())
}

/// State family whose half-width/confidence trade-off is traced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Uniform,
    Dpss,
    /// Compression of the DPSS for the same half-width.
    MpsMatched {
        chi: usize,
    },
    /// Best compression over DPSS source half-widths.
    MpsOptimized {
        chi: usize,
    },
}

impl Family {
    pub fn label(&self) -> String {
        match self {
            Family::Uniform => "uniform".into(),
            Family::Dpss => "dpss".into(),
            Family::MpsMatched { chi } => format!("mps_matched_chi{chi}"),
            Family::MpsOptimized { chi } => format!("mps_optimized_chi{chi}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub delta: f64,
    /// `None` when no half-width up to π reaches `1 − δ`.
    pub halfwidth: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub n_qubits: usize,
    pub family: Family,
    pub points: Vec<TradeoffPoint>,
}

/// Smallest `d` with `confidence(state, d) ≥ 1 − δ`, or `None` if even
/// `d = π` falls short. The confidence of a fixed state grows with `d`.
pub fn required_halfwidth(state: &[f64], delta: f64) -> Result<Option<f64>> {
    let target = 1.0 - delta;
    let op_at = |d: f64| ToeplitzOp::concentration(state.len(), d).quadratic_form(state);
    if op_at(PI) < target - 1e-15 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0f64, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if op_at(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(Some(hi))
}

fn compressed_window(dim: usize, d: f64, chi: usize) -> Result<Vec<f64>> {
    let w = dpss_window(dim, d)?;
    Mps::from_state(&w.amplitudes, chi)?.to_state()
}

fn matched_halfwidth(dim: usize, delta: f64, chi: usize) -> Result<Option<f64>> {
    let fails = |d: f64| -> Result<f64> {
        let s = compressed_window(dim, d, chi)?;
        Ok(1.0 - ToeplitzOp::concentration(dim, d).quadratic_form(&s))
    };
    let start = solve_halfwidth(dim, delta)?;
    if fails(start)? <= delta {
        return Ok(Some(start));
    }
    let mut lo = start;
    let mut hi = start;
    loop {
        hi = (hi * 1.05).min(PI);
        if fails(hi)? <= delta {
            break;
        }
        if hi >= PI {
            return Ok(None);
        }
        lo = hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fails(mid)? <= delta {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(Some(hi))
}

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let count = ((decades * per_decade as f64).ceil() as usize).max(1) + 1;
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect()
}

fn optimized_halfwidth(dim: usize, delta: f64, chi: usize) -> Result<Option<f64>> {
    let centre = solve_halfwidth(dim, delta)?;
    let eval = |src: f64| -> Result<Option<f64>> {
        let s = compressed_window(dim, src, chi)?;
        required_halfwidth(&s, delta)
    };
    let grid: Vec<f64> = log_grid(centre / 4.0, (4.0 * centre).min(PI), 41);
    let coarse: Vec<Option<f64>> = grid.par_iter().map(|&g| eval(g)).collect::<Result<_>>()?;
    let best = coarse
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (i, x)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let Some((bi, bv)) = best else { return Ok(None) };
    let lo = grid[bi.saturating_sub(1)];
    let hi = grid[(bi + 1).min(grid.len() - 1)];
    let fine: Vec<f64> = (0..=40).map(|i| lo + (hi - lo) * i as f64 / 40.0).collect();
    let refined: Vec<Option<f64>> = fine.par_iter().map(|&g| eval(g)).collect::<Result<_>>()?;
    Ok(Some(refined.into_iter().flatten().fold(bv, f64::min)))
}

/// Half-width needed by `family` on `2^n_qubits` points for each `δ`.
pub fn tradeoff_curve(n_qubits: usize, family: Family, deltas: &[f64]) -> Result<TradeoffCurve> {
    if n_qubits == 0 || n_qubits > 20 {
        return invalid(format!("trade-off curves support 1..=20 qubits, got {n_qubits}"));
    }
    if let Some(bad) = deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        return invalid(format!("failure probability must lie in (0, 1), got {bad}"));
    }
    let dim = 1usize << n_qubits;
    let points = deltas
        .par_iter()
        .map(|&delta| {
            let halfwidth = match family {
                Family::Uniform => {
                    let u = vec![1.0 / (dim as f64).sqrt(); dim];
                    required_halfwidth(&u, delta)?
                }
                Family::Dpss => Some(solve_halfwidth(dim, delta)?),
                Family::MpsMatched { chi } => matched_halfwidth(dim, delta, chi)?,
                Family::MpsOptimized { chi } => optimized_halfwidth(dim, delta, chi)?,
            };
            Ok(TradeoffPoint { delta, halfwidth })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TradeoffCurve {
        n_qubits,
        family,
        points,
    })
}

/// Logarithmically spaced failure probabilities from `hi` down to `lo`.
pub fn delta_grid(hi: f64, lo: f64, per_decade: usize) -> Vec<f64> {
    log_grid(lo, hi, per_decade).into_iter().rev().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpss::solve_halfwidth_window;

    #[test]
    fn fft_matches_brute_force() {
        let w = solve_halfwidth_window(50, 1e-3).unwrap();
        let a = confidence(&w.amplitudes, 0.2).unwrap();
        let b = confidence_brute_force(&w.amplitudes, 0.2).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn uniform_state_at_pi_is_certain() {
        let u = vec![0.25; 16];
        assert!((confidence(&u, PI).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_infidelity_bound_is_zero() {
        assert_eq!(fidelity_delta_bound(1.0, 1e-3).unwrap(), 0.0);
        assert!(fidelity_delta_bound(1.2, 1e-3).is_err());
        assert!(fidelity_delta_bound(0.9, 0.0).is_err());
    }

    #[test]
    fn precise_increase_matches_direct_difference() {
        let w = solve_halfwidth_window(64, 1e-2).unwrap();
        let mut s = w.amplitudes.clone();
        s[3] += 1e-3;
        s[40] -= 2e-3;
        let nrm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        s.iter_mut().for_each(|x| *x /= nrm);
        let direct = ((1.0 - confidence(&s, w.halfwidth).unwrap()) - w.delta()) / w.delta();
        let precise = relative_delta_increase(&s, &w).unwrap();
        assert!((direct - precise).abs() < 1e-10 * direct.abs().max(1.0));
        assert!(precise > 0.0);
    }
}

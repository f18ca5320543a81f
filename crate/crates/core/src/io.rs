//! File formats shared by the library and the command-line tool.
//!
//! Amplitude vectors are CSV (`index,amplitude`, 17 significant digits)
//! with a JSON sidecar for metadata. Everything structured is JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::TradeoffCurve;
use crate::dpss::{dpss_window, Bandwidth, DpssWindow, PaddedWindow, PaddingRule};
use crate::error::{Error, Result};
use crate::sim::QpeDistribution;

/// Metadata written next to an amplitude CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowMeta {
    pub dim: usize,
    pub halfwidth: f64,
    pub eigenvalue: f64,
    pub delta: f64,
    #[serde(default)]
    pub bandwidth: Bandwidth,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<PaddingRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success_probability: Option<f64>,
}

impl WindowMeta {
    pub fn for_window(w: &DpssWindow, bandwidth: Bandwidth) -> Self {
        WindowMeta {
            dim: w.dim,
            halfwidth: w.halfwidth,
            eigenvalue: w.eigenvalue,
            delta: 1.0 - w.eigenvalue,
            bandwidth,
            n_qubits: None,
            offset: None,
            rule: None,
            norm_constant: None,
            success_probability: None,
        }
    }

    pub fn for_padded(w: &DpssWindow, p: &PaddedWindow, bandwidth: Bandwidth) -> Self {
        WindowMeta {
            n_qubits: Some(p.n_qubits),
            offset: Some(p.offset),
            rule: Some(p.rule),
            norm_constant: Some(p.norm_constant),
            success_probability: Some(p.success_probability),
            ..Self::for_window(w, bandwidth)
        }
    }
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    create_parent(path)?;
    fs::write(path, text)?;
    Ok(())
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &serde_json::to_string_pretty(value)?)
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn amplitudes_csv(amps: &[f64]) -> String {
    let mut s = String::with_capacity(amps.len() * 28 + 16);
    s.push_str("index,amplitude\n");
    for (i, a) in amps.iter().enumerate() {
        let _ = writeln!(s, "{i},{a:.16e}");
    }
    s
}

pub fn parse_amplitudes_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("index")) {
            continue;
        }
        let (idx, val) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `index,amplitude`", lineno + 1)))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: bad index: {e}", lineno + 1)))?;
        if idx != out.len() {
            return Err(Error::Parse(format!(
                "line {}: index {idx} out of sequence",
                lineno + 1
            )));
        }
        let v: f64 = val
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: bad amplitude: {e}", lineno + 1)))?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_amplitudes(path: &Path, amps: &[f64]) -> Result<()> {
    write_text(path, &amplitudes_csv(amps))
}

pub fn read_amplitudes(path: &Path) -> Result<Vec<f64>> {
    parse_amplitudes_csv(&fs::read_to_string(path)?)
}

/// Sidecar path for an amplitude CSV: `x.csv` → `x.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn curves_csv(curves: &[TradeoffCurve]) -> String {
    let mut s = String::from("delta,halfwidth,family,n,chi\n");
    for c in curves {
        let chi = match c.family {
            crate::analysis::Family::MpsMatched { chi } | crate::analysis::Family::MpsOptimized { chi } => {
                chi.to_string()
            }
            _ => String::new(),
        };
        for p in &c.points {
            let d = p
                .halfwidth
                .map_or_else(|| "unattainable".to_string(), |v| format!("{v:.16e}"));
            let _ = writeln!(s, "{:.16e},{},{},{},{}", p.delta, d, c.family.label(), c.n_qubits, chi);
        }
    }
    s
}

pub fn outcomes_csv(dist: &QpeDistribution) -> String {
    let mut s = String::from("l,phi_hat,probability\n");
    for (l, p) in dist.probabilities.iter().enumerate() {
        let _ = writeln!(s, "{l},{:.16e},{p:.16e}", dist.estimate(l));
    }
    s
}

pub fn outcomes_from_distribution(n_qubits: usize, dither: f64, probs: &[f64]) -> String {
    let n = (1usize << n_qubits) as f64;
    let mut s = String::from("l,phi_hat,probability\n");
    for (l, p) in probs.iter().enumerate() {
        let est = crate::sim::wrap_phase(2.0 * std::f64::consts::PI * l as f64 / n - dither);
        let _ = writeln!(s, "{l},{est:.16e},{p:.16e}");
    }
    s
}

pub fn density_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("delta_phi,density\n");
    for (x, p) in points {
        let _ = writeln!(s, "{x:.16e},{p:.16e}");
    }
    s
}

/// Environment variable naming the window cache directory.
pub const CACHE_ENV: &str = "PQPE_CACHE_DIR";

fn cache_file(dir: &Path, dim: usize, d: f64) -> PathBuf {
    dir.join(format!("dpss_{dim}_{d:.16e}.json"))
}

/// [`dpss_window`], memoized on disk under `dir` keyed by `(dim, d)`.
pub fn cached_dpss_window(dir: Option<&Path>, dim: usize, d: f64) -> Result<DpssWindow> {
    let Some(dir) = dir else { return dpss_window(dim, d) };
    let path = cache_file(dir, dim, d);
    if let Ok(w) = load_json::<DpssWindow>(&path) {
        if w.dim == dim && w.halfwidth == d {
            return Ok(w);
        }
    }
    let w = dpss_window(dim, d)?;
    // A failed cache write only costs a recomputation next time.
    let _ = save_json(&path, &w);
    Ok(w)
}

/// Cache directory from [`CACHE_ENV`], if set and non-empty.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let v = vec![0.1, -1.0 / 3.0, 1e-300, std::f64::consts::PI, -0.0, 5e-324];
        let back = parse_amplitudes_csv(&amplitudes_csv(&v)).unwrap();
        assert_eq!(v.len(), back.len());
        for (a, b) in v.iter().zip(&back) {
            assert_eq!(a.to_bits() & !(1 << 63), b.to_bits() & !(1 << 63));
        }
    }

    #[test]
    fn csv_rejects_gaps() {
        assert!(parse_amplitudes_csv("index,amplitude\n0,1.0\n2,0.5\n").is_err());
        assert!(parse_amplitudes_csv("0;1.0\n").is_err());
    }
}

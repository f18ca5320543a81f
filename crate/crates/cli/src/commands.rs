use std::path::Path;

use pqpe_core::analysis::{bound_from_infidelity, bound_regime_holds, confidence_report, delta_comparison};
use pqpe_core::dpss::{padded_window, window_for_delta, Bandwidth, DpssWindow, PaddingRule};
use pqpe_core::io::{
    cache_dir_from_env, cached_dpss_window, load_json, outcomes_csv, outcomes_from_distribution, read_amplitudes,
    save_json, sidecar_path, write_amplitudes, write_text, WindowMeta,
};
use pqpe_core::mps::Mps;
use pqpe_core::sim::{qpe_distribution, semiclassical_run, QpeDistribution, SemiclassicalMode};
use pqpe_core::synth::{synthesize, GateList, SynthesisOptions};
use serde::Serialize;
use serde_json::json;

use crate::settings::{need, Settings, SimMode};
use crate::Failure;

fn emit<T: Serialize>(value: &T) -> Result<(), Failure> {
    let line = serde_json::to_string(value).map_err(pqpe_core::Error::from)?;
    println!("{line}");
    Ok(())
}

/// Amplitudes from a CSV, plus the sidecar metadata when one is present.
fn load_amplitudes(path: &Path) -> Result<(Vec<f64>, Option<WindowMeta>), Failure> {
    let amps = read_amplitudes(path)?;
    let side = sidecar_path(path);
    let meta = if side.exists() {
        Some(load_json::<WindowMeta>(&side)?)
    } else {
        None
    };
    Ok((amps, meta))
}

fn window_from_file(path: &Path) -> Result<(DpssWindow, Bandwidth), Failure> {
    let (amps, meta) = load_amplitudes(path)?;
    let meta = meta.ok_or_else(|| {
        Failure::Usage(format!(
            "{} has no metadata sidecar {}",
            path.display(),
            sidecar_path(path).display()
        ))
    })?;
    if meta.dim != amps.len() {
        return Err(Failure::Usage(format!(
            "sidecar says {} amplitudes, file has {}",
            meta.dim,
            amps.len()
        )));
    }
    let bw = meta.bandwidth;
    Ok((
        DpssWindow {
            dim: meta.dim,
            halfwidth: meta.halfwidth,
            eigenvalue: meta.eigenvalue,
            amplitudes: amps,
        },
        bw,
    ))
}

/// Window described by `--dim` and exactly one of `--d` / `--delta`.
fn window_from_flags(s: &Settings) -> Result<(DpssWindow, Bandwidth), Failure> {
    let dim = need(&s.dim, "--dim")?;
    if dim == 0 {
        return Err(Failure::Usage("--dim must be positive".into()));
    }
    let delta = s.single_delta()?;
    let bw = s.bandwidth();
    match (s.d, delta) {
        (Some(d), None) => {
            if bw != Bandwidth::Standard {
                return Err(Failure::Usage("--bandwidth reference needs --delta".into()));
            }
            Ok((cached_dpss_window(cache_dir_from_env().as_deref(), dim, d)?, bw))
        }
        (None, Some(delta)) => Ok((window_for_delta(dim, delta, bw)?, bw)),
        _ => Err(Failure::Usage("give exactly one of --d and --delta".into())),
    }
}

fn register_for(dim: usize, s: &Settings) -> Result<usize, Failure> {
    let min = dim.next_power_of_two().trailing_zeros() as usize;
    match s.n {
        Some(r) => {
            let n = r.single("--n")?;
            if n < min {
                return Err(Failure::Usage(format!("--n {n} cannot hold {dim} amplitudes")));
            }
            Ok(n)
        }
        None => Ok(min),
    }
}

pub fn dpss(s: &Settings) -> Result<(), Failure> {
    let (w, bw) = window_from_flags(s)?;
    let out = s.out_dir();
    let csv = out.join(format!("dpss_{}.csv", w.dim));
    write_amplitudes(&csv, &w.amplitudes)?;
    let meta = WindowMeta::for_window(&w, bw);
    save_json(&sidecar_path(&csv), &meta)?;
    if s.n.is_some() {
        let n = register_for(w.dim, s)?;
        let rule = s.padding.map_or(PaddingRule::default_for(n), |p| p.0);
        let p = padded_window(&w, n, None, rule)?;
        let pcsv = out.join(format!("padded_{}_n{n}.csv", w.dim));
        write_amplitudes(&pcsv, &p.amplitudes)?;
        let pmeta = WindowMeta::for_padded(&w, &p, bw);
        save_json(&sidecar_path(&pcsv), &pmeta)?;
        return emit(&pmeta);
    }
    emit(&meta)
}

pub fn compress(s: &Settings) -> Result<(), Failure> {
    let chi = s.chi.unwrap_or(4);
    let (state, source) = match &s.window {
        Some(path) => {
            let (amps, _) = load_amplitudes(path)?;
            if amps.len().is_power_of_two() && s.n.is_none() {
                (amps, path.display().to_string())
            } else {
                let (w, _) = window_from_file(path)?;
                let n = register_for(w.dim, s)?;
                let rule = s.padding.map_or(PaddingRule::default_for(n), |p| p.0);
                (padded_window(&w, n, None, rule)?.amplitudes, path.display().to_string())
            }
        }
        None => {
            let (w, _) = window_from_flags(s)?;
            let label = format!("dpss dim {} d {:.17e}", w.dim, w.halfwidth);
            if w.dim.is_power_of_two() && s.n.is_none() {
                (w.amplitudes, label)
            } else {
                let n = register_for(w.dim, s)?;
                let rule = s.padding.map_or(PaddingRule::default_for(n), |p| p.0);
                (padded_window(&w, n, None, rule)?.amplitudes, label)
            }
        }
    };
    let mps = Mps::from_state(&state, chi)?;
    let fid = mps.fidelity_with(&state)?;
    let out = s.out_dir();
    save_json(&out.join("mps.json"), &mps)?;
    let summary = json!({
        "source": source,
        "n_qubits": mps.n_qubits,
        "chi": chi,
        "bond_dims": mps.bond_dims,
        "fidelity": fid,
        "infidelity": 1.0 - fid,
        "discarded_weight": mps.discarded_weight(),
        "degenerate_truncation": mps.degenerate_truncation,
    });
    save_json(&out.join("compress.json"), &summary)?;
    emit(&summary)
}

pub fn synth(s: &Settings) -> Result<(), Failure> {
    let mps: Mps = load_json(&need(&s.mps, "--mps")?)?;
    let mut opts = SynthesisOptions::default();
    if let Some(l) = s.eps_exp {
        if !(l > 0.0) {
            return Err(Failure::Usage("--eps-exp must be positive".into()));
        }
        opts.log2_inv_eps = l;
    }
    if let Some(seed) = s.seed {
        opts.seed = seed;
    }
    let view = mps.m_tensor_view()?;
    let (gates, report) = synthesize(&view, &opts)?;
    let out = s.out_dir();
    save_json(&out.join("circuit.json"), &gates)?;
    write_text(&out.join("circuit.qasm"), &gates.to_qasm())?;
    save_json(&out.join("synth_report.json"), &report)?;
    emit(&json!({
        "n_qubits": report.n_qubits,
        "template": report.template,
        "rotation_count": report.rotation_count,
        "budget_rotation_count": report.budget_rotation_count,
        "t_cost_budget": report.t_cost_budget,
        "max_block_frobenius": report.blocks.iter().map(|b| b.frobenius).fold(0.0, f64::max),
        "state_fidelity": report.state_fidelity,
    }))
}

pub fn simulate(s: &Settings) -> Result<(), Failure> {
    let phi = need(&s.phi, "--phi")?;
    let dither = s.dither.unwrap_or(0.0);
    let mode = s.mode.unwrap_or(SimMode::Full);
    let sources = [s.mps.is_some(), s.circuit.is_some(), s.state.is_some()];
    if sources.iter().filter(|x| **x).count() != 1 {
        return Err(Failure::Usage(
            "give exactly one of --mps, --circuit and --state".into(),
        ));
    }
    let out = s.out_dir();
    let mut peak = None;
    let dist = if let Some(path) = &s.mps {
        let mps: Mps = load_json(path)?;
        let view = mps.m_tensor_view()?;
        match mode {
            SimMode::Full => qpe_distribution(&view.state()?, phi, dither)?,
            SimMode::Exact | SimMode::Sampled => {
                let m = if mode == SimMode::Exact {
                    SemiclassicalMode::ExactBranch
                } else {
                    SemiclassicalMode::Sampled {
                        shots: s.shots.unwrap_or(10_000),
                        seed: s.seed.unwrap_or(0),
                    }
                };
                let r = semiclassical_run(&view, 1 << view.n_qubits, phi, dither, m)?;
                peak = Some(r.peak_live_qubits);
                QpeDistribution {
                    n_qubits: r.n_qubits,
                    phase: phi,
                    dither,
                    probabilities: r.distribution,
                }
            }
        }
    } else {
        if mode != SimMode::Full {
            return Err(Failure::Usage("semiclassical modes need --mps".into()));
        }
        let control = if let Some(path) = &s.circuit {
            let gates: GateList = load_json(path)?;
            let mut psi = vec![0.0; 1usize << gates.n_qubits];
            psi[0] = 1.0;
            gates.apply_real(&mut psi)?;
            psi
        } else {
            load_amplitudes(s.state.as_ref().unwrap())?.0
        };
        qpe_distribution(&control, phi, dither)?
    };
    let csv = if peak.is_some() {
        outcomes_from_distribution(dist.n_qubits, dither, &dist.probabilities)
    } else {
        outcomes_csv(&dist)
    };
    write_text(&out.join("outcomes.csv"), &csv)?;
    let summary = json!({
        "n_qubits": dist.n_qubits,
        "phase": phi,
        "dither": dither,
        "mode": format!("{mode:?}").to_lowercase(),
        "shots": if mode == SimMode::Sampled { Some(s.shots.unwrap_or(10_000)) } else { None },
        "peak_live_qubits": peak,
        "confidence": s.d.map(|d| dist.confidence(d)),
    });
    save_json(&out.join("simulate.json"), &summary)?;
    emit(&summary)
}

pub fn analyze(s: &Settings, with_confidence: bool) -> Result<(), Failure> {
    let path = need(&s.state, "--state")?;
    let (state, meta) = load_amplitudes(&path)?;
    let label = path
        .file_stem()
        .map_or_else(|| "state".to_string(), |x| x.to_string_lossy().into_owned());
    let window = match &s.window {
        Some(w) => Some(window_from_file(w)?.0),
        None => None,
    };
    if !with_confidence && window.is_none() {
        return Err(Failure::Usage(
            "nothing to analyze: pass --confidence and/or --window".into(),
        ));
    }
    let mut result = serde_json::Map::new();
    if with_confidence {
        let d =
            s.d.or(window.as_ref().map(|w| w.halfwidth))
                .or(meta.as_ref().map(|m| m.halfwidth))
                .ok_or_else(|| Failure::Usage("missing required flag --d".into()))?;
        let reports = confidence_report(&[(label.clone(), state.clone())], d)?;
        result.insert(
            "confidence".into(),
            serde_json::to_value(&reports).map_err(pqpe_core::Error::from)?,
        );
    }
    if let Some(w) = &window {
        let cmp = delta_comparison(&state, w)?;
        let dot: f64 = state.iter().zip(&w.amplitudes).map(|(a, b)| a * b).sum();
        let infidelity = (1.0 - dot * dot).clamp(0.0, 1.0);
        let bound = bound_from_infidelity(infidelity, cmp.delta_window)?;
        result.insert(
            "comparison".into(),
            json!({
                "halfwidth": w.halfwidth,
                "delta_window": cmp.delta_window,
                "delta_state": cmp.delta_approx,
                "relative_increase": cmp.relative_increase,
                "fidelity": dot * dot,
                "bound": bound,
                "bound_applies": bound_regime_holds(1.0 - infidelity, cmp.delta_window, cmp.delta_approx),
                "within_bound": cmp.relative_increase <= bound + 1e-12,
            }),
        );
    }
    let value = serde_json::Value::Object(result);
    save_json(&s.out_dir().join(format!("analyze_{label}.json")), &value)?;
    emit(&value)
}

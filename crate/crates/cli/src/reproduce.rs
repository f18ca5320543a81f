use std::fmt::Write as _;

use pqpe_core::analysis::{compressed_window_state, delta_grid, relative_delta_increase, tradeoff_curve, Family};
use pqpe_core::dpss::{solve_halfwidth_window, window_for_delta, Bandwidth, PaddingRule};
use pqpe_core::io::{curves_csv, save_json, write_text};
use pqpe_core::mps::{reduced_convergence_fidelity, Mps};
use pqpe_core::reference::reference_data;
use pqpe_core::synth::{t_cost, t_count};
use rayon::prelude::*;
use serde::Serialize;

use crate::settings::{FloatList, IntRange, Settings};
use crate::{Failure, Target};

#[derive(Debug, Serialize)]
struct Entry {
    name: String,
    value: f64,
    reference: f64,
    tolerance: String,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct Property {
    name: String,
    pass: bool,
    detail: String,
}

#[derive(Debug, Serialize)]
struct Comparison {
    target: String,
    reference_version: u32,
    pass: bool,
    entries: Vec<Entry>,
    properties: Vec<Property>,
}

fn property(name: &str, pass: bool, detail: String) -> Property {
    Property {
        name: name.into(),
        pass,
        detail,
    }
}

fn finish(
    s: &Settings,
    target: &str,
    csv: String,
    entries: Vec<Entry>,
    properties: Vec<Property>,
) -> Result<(), Failure> {
    let pass = entries.iter().all(|e| e.pass) && properties.iter().all(|p| p.pass);
    let out = s.out_dir();
    write_text(&out.join(format!("{target}.csv")), &csv)?;
    let cmp = Comparison {
        target: target.into(),
        reference_version: reference_data().version,
        pass,
        entries,
        properties,
    };
    save_json(&out.join(format!("{target}_comparison.json")), &cmp)?;
    println!(
        "{target}: {} ({} entries, {} properties)",
        if pass { "pass" } else { "FAIL" },
        cmp.entries.len(),
        cmp.properties.len()
    );
    if pass {
        return Ok(());
    }
    eprintln!("{:<36} {:>14} {:>14}  tolerance", "entry", "value", "reference");
    for e in cmp.entries.iter().filter(|e| !e.pass) {
        eprintln!(
            "{:<36} {:>14.6e} {:>14.6e}  {}",
            e.name, e.value, e.reference, e.tolerance
        );
    }
    for p in cmp.properties.iter().filter(|p| !p.pass) {
        eprintln!("property {}: {}", p.name, p.detail);
    }
    let failed = cmp.entries.iter().filter(|e| !e.pass).count() + cmp.properties.iter().filter(|p| !p.pass).count();
    Err(Failure::Mismatch(format!("{failed} check(s) of {target} failed")))
}

fn deltas_or(s: &Settings, default: &[f64]) -> Result<Vec<f64>, Failure> {
    let v = s.delta.clone().map_or_else(|| default.to_vec(), |FloatList(v)| v);
    if let Some(bad) = v.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        return Err(Failure::Usage(format!("--delta must lie in (0, 1), got {bad}")));
    }
    Ok(v)
}

fn table1(s: &Settings) -> Result<(), Failure> {
    let table = reference_data().infidelity;
    let range = s.n.unwrap_or(IntRange { lo: 6, hi: 12 });
    if range.lo < 5 || range.hi > 24 {
        return Err(Failure::Usage(format!("--n must lie within 5..24, got {range}")));
    }
    let deltas = deltas_or(s, &table.deltas)?;
    let chis: Vec<usize> = s.chi.map_or_else(|| vec![2, 4], |c| vec![c]);
    if let Some(c) = chis.iter().find(|c| **c != 2 && **c != 4) {
        return Err(Failure::Usage(format!(
            "the table lists bond dimensions 2 and 4, not {c}"
        )));
    }
    for &delta in &deltas {
        if table.lookup(range.lo, 2, delta).is_none() {
            return Err(Failure::Usage(format!("the table has no column for delta {delta:e}")));
        }
    }
    let bw = s.bandwidth.map_or(Bandwidth::Reference, |b| b.0);
    let jobs: Vec<(usize, f64)> = range.iter().flat_map(|n| deltas.iter().map(move |&d| (n, d))).collect();
    let rows: Vec<Vec<(usize, f64, usize, f64)>> = jobs
        .par_iter()
        .map(|&(n, delta)| {
            let w = window_for_delta(1 << n, delta, bw)?;
            chis.iter()
                .map(|&chi| {
                    let f = Mps::from_state(&w.amplitudes, chi)?.fidelity_with(&w.amplitudes)?;
                    Ok((n, delta, chi, 1.0 - f))
                })
                .collect::<pqpe_core::Result<Vec<_>>>()
        })
        .collect::<pqpe_core::Result<_>>()?;
    let mut csv = String::from("n,chi,delta,infidelity,reference,relative_deviation\n");
    let mut entries = Vec::new();
    for (n, delta, chi, inf) in rows.into_iter().flatten() {
        let want = table.lookup(n, chi, delta).expect("checked above");
        let (dev, pass, tol) = if want == 0.0 {
            (inf.abs(), inf.abs() <= 1e-12, "absolute 1e-12")
        } else {
            let r = (inf / want - 1.0).abs();
            (r, r <= 0.02, "relative 2%")
        };
        let _ = writeln!(csv, "{n},{chi},{delta:e},{inf:.6e},{want:.6e},{dev:.6e}");
        entries.push(Entry {
            name: format!("n={n} chi={chi} delta={delta:e}"),
            value: inf,
            reference: want,
            tolerance: tol.into(),
            pass,
        });
    }
    finish(s, "table1", csv, entries, Vec::new())
}

fn fig_relerr(s: &Settings) -> Result<(), Failure> {
    let dmin = s.dmin.unwrap_or(33).max(2);
    let dmax = s.dmax.unwrap_or(4096);
    if dmax <= dmin || dmax > 1 << 20 {
        return Err(Failure::Usage(format!(
            "need 2 ≤ --dmin < --dmax ≤ 2^20, got {dmin}..{dmax}"
        )));
    }
    let deltas = deltas_or(s, &[1e-2])?;
    let chi = s.chi.unwrap_or(4);
    let dims: Vec<usize> = (dmin..=dmax).collect();
    let mut csv = String::from("dim,delta,relative_increase\n");
    let mut props = Vec::new();
    for &delta in &deltas {
        let rel: Vec<f64> = dims
            .par_iter()
            .map(|&dim| {
                let n = dim.next_power_of_two().trailing_zeros() as usize;
                let rule = s.padding.map_or(PaddingRule::default_for(n), |p| p.0);
                let w = solve_halfwidth_window(dim, delta)?;
                let approx = compressed_window_state(&w, chi, rule)?;
                relative_delta_increase(&approx, &w)
            })
            .collect::<pqpe_core::Result<_>>()?;
        for (dim, r) in dims.iter().zip(&rel) {
            let _ = writeln!(csv, "{dim},{delta:e},{r:.16e}");
        }
        let at = |d: usize| rel[d - dmin];
        let max = rel.iter().cloned().fold(f64::MIN, f64::max);
        props.push(property(
            &format!("below_1e-3 delta={delta:e}"),
            max < 1e-3,
            format!("max {max:.3e}"),
        ));
        let mut bad_min = Vec::new();
        let mut p = dmin.next_power_of_two();
        while p <= dmax {
            if p > dmin && !(at(p) < at(p - 1) && (p == dmax || at(p) < at(p + 1))) {
                bad_min.push(p);
            }
            p *= 2;
        }
        props.push(property(
            &format!("minima_at_powers_of_two delta={delta:e}"),
            bad_min.is_empty(),
            format!("not strict local minima: {bad_min:?}"),
        ));
        let mut bad_max = Vec::new();
        let mut lo = (dmin - 1).next_power_of_two() + 1;
        while 2 * (lo - 1) <= dmax {
            let hi = 2 * (lo - 1);
            let arg = (lo..=hi).max_by(|&a, &b| at(a).total_cmp(&at(b))).unwrap();
            if arg != lo {
                bad_max.push((lo, arg));
            }
            lo = hi + 1;
        }
        props.push(property(
            &format!("maxima_after_powers_of_two delta={delta:e}"),
            bad_max.is_empty(),
            format!("(expected, found) octave maxima: {bad_max:?}"),
        ));
    }
    finish(s, "fig_relerr", csv, Vec::new(), props)
}

fn fig_convergence(s: &Settings) -> Result<(), Failure> {
    let range = s.n.unwrap_or(IntRange { lo: 6, hi: 12 });
    if range.lo == 0 || range.hi >= 24 {
        return Err(Failure::Usage(format!("--n must lie within 1..23, got {range}")));
    }
    let delta = s.single_delta()?.unwrap_or(1e-2);
    let chi = s.chi.unwrap_or(4);
    let states: Vec<Vec<f64>> = (range.lo..=range.hi + 1)
        .into_par_iter()
        .map(|k| {
            let w = solve_halfwidth_window(1 << k, delta)?;
            Mps::from_state(&w.amplitudes, chi)?.to_state()
        })
        .collect::<pqpe_core::Result<_>>()?;
    let mut csv = String::from("dim,infidelity\n");
    let mut infid = Vec::new();
    for (k, pair) in range.iter().zip(states.windows(2)) {
        let v = 1.0 - reduced_convergence_fidelity(&pair[0], &pair[1])?;
        let _ = writeln!(csv, "{},{v:.16e}", 1usize << k);
        infid.push(v);
    }
    let ok = infid.windows(2).all(|p| p[1] < p[0]);
    let props = vec![property("strictly_decreasing", ok, format!("{infid:?}"))];
    finish(s, "fig_convergence", csv, Vec::new(), props)
}

fn fig_tradeoff(s: &Settings) -> Result<(), Failure> {
    let n = s.n.map_or(Ok(8), |r| r.single("--n"))?;
    let deltas = match &s.delta {
        Some(_) => deltas_or(s, &[])?,
        None => delta_grid(1e-1, 1e-10, 2),
    };
    let chi = s.chi.unwrap_or(4);
    let families = [
        Family::Uniform,
        Family::Dpss,
        Family::MpsMatched { chi },
        Family::MpsOptimized { chi },
    ];
    let curves = families
        .iter()
        .map(|&f| tradeoff_curve(n, f, &deltas))
        .collect::<pqpe_core::Result<Vec<_>>>()?;
    let dpss = &curves[1];
    let mut props = Vec::new();
    let mut worse = Vec::new();
    for c in curves.iter().filter(|c| c.family != Family::Dpss) {
        for (p, q) in c.points.iter().zip(&dpss.points) {
            if let (Some(a), Some(b)) = (p.halfwidth, q.halfwidth) {
                if a < b * (1.0 - 1e-9) {
                    worse.push(format!("{} at {:e}", c.family.label(), p.delta));
                }
            }
        }
    }
    props.push(property("dpss_is_optimal", worse.is_empty(), format!("{worse:?}")));
    let mut excess: f64 = 0.0;
    for (p, q) in curves[2].points.iter().zip(&dpss.points) {
        if p.delta >= 1e-6 {
            excess = excess.max(p.halfwidth.unwrap_or(std::f64::consts::PI) / q.halfwidth.unwrap() - 1.0);
        }
    }
    props.push(property(
        "matched_within_1pct",
        excess < 0.01,
        format!("largest excess {:.4}%", 100.0 * excess),
    ));
    if let Some(i) = deltas.iter().position(|&d| d <= 1e-9 * (1.0 + 1e-12)) {
        let ratio = curves[3].points[i].halfwidth.unwrap_or(std::f64::consts::PI) / dpss.points[i].halfwidth.unwrap();
        props.push(property(
            "optimized_cutoff",
            ratio >= 2.0,
            format!("optimized/dpss = {ratio:.3} at delta {:e}", deltas[i]),
        ));
    }
    finish(s, "fig_tradeoff", curves_csv(&curves), Vec::new(), props)
}

fn table_cost(s: &Settings) -> Result<(), Failure> {
    let rows = s.rows.as_deref().unwrap_or("mps_eq");
    let all = match rows {
        "mps_eq" => false,
        "all" => true,
        other => return Err(Failure::Usage(format!("unknown --rows `{other}` (mps_eq, all)"))),
    };
    let table = reference_data().t_cost;
    let mut csv = String::from("n,log2_inv_eps,t_cost,t_count,reference");
    csv.push_str(if all { ",gr_toffoli,mps_toffoli\n" } else { "\n" });
    let mut entries = Vec::new();
    for row in &table.rows {
        for (i, &l) in table.log2_inv_eps.iter().enumerate() {
            let c = t_cost(row.n, l);
            let want = row.mps_t[i] as f64;
            let _ = write!(csv, "{},{l},{c:.4},{},{}", row.n, t_count(row.n, l), row.mps_t[i]);
            if all {
                let _ = write!(csv, ",{},{}", row.gr_toffoli[i], row.mps_toffoli[i]);
            }
            csv.push('\n');
            entries.push(Entry {
                name: format!("n={} log2(1/eps)={l}", row.n),
                value: c,
                reference: want,
                tolerance: "absolute 1".into(),
                pass: (c - want).abs() <= 1.0,
            });
        }
    }
    finish(s, "table_cost", csv, entries, Vec::new())
}

pub fn run(s: &Settings, target: Target) -> Result<(), Failure> {
    match target {
        Target::Table1 => table1(s),
        Target::FigRelerr => fig_relerr(s),
        Target::FigConvergence => fig_convergence(s),
        Target::FigTradeoff => fig_tradeoff(s),
        Target::TableCost => table_cost(s),
    }
}

//! From an MPS isometry view to a gate list.
//!
//! The bond-4 blocks are merged from the least significant end: the two
//! narrow tail blocks fold into the last 8×4 block, and after each 3-qubit
//! block is factored the left factor of its cosine-sine decomposition is
//! pushed into the block before it. What remains at the top is a plain
//! 3-qubit state, prepared by a multiplexed `R_y` tree.

use serde::{Deserialize, Serialize};

use super::cartan::cartan_d;
use super::cost;
use super::csd::{csd_2by1, RotationQubit};
use super::fit::fit_so4;
use super::gates::{Gate, GateList};
use super::linalg::{complete_columns, eye, kron, Mat};
use crate::error::{Error, Result};
use crate::mps::{bond_dims, MTensorView};

#[derive(Clone, Debug)]
pub struct SynthesisOptions {
    pub seed: u64,
    pub max_restarts: usize,
    /// Largest Frobenius distance accepted for a block and for a template fit.
    pub tolerance: f64,
    /// `log2(1/ε)` for the rotation-synthesis cost estimate.
    pub log2_inv_eps: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            seed: 0x5eed,
            max_restarts: 64,
            tolerance: 1e-10,
            log2_inv_eps: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub site: usize,
    pub frobenius: f64,
    pub csd_angles: Vec<f64>,
    pub cartan_angles: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub n_qubits: usize,
    pub template: String,
    pub rotation_count: usize,
    pub expected_rotation_count: usize,
    /// Count for the 17-rotation block variant the cost formula assumes.
    pub budget_rotation_count: usize,
    pub cz_count: usize,
    pub cx_count: usize,
    pub blocks: Vec<BlockReport>,
    pub log2_inv_eps: f64,
    pub t_cost_budget: f64,
    pub t_cost_emitted: f64,
    /// Overlap of the emitted circuit's output with the view's state.
    pub state_fidelity: Option<f64>,
}

/// Multiplexed `R_y` on `target`: for control value `c` (bit `b` of `c` is
/// `controls[b]`) the rotation angle is `angles[c]`. Uses Gray-code CZ
/// ladders; with `omit_last_cz` the final CZ is left out, so the result is
/// the multiplexor followed by a CZ between the target and the last control
/// toggled.
pub fn mux_ry(target: usize, controls: &[usize], angles: &[f64], omit_last_cz: bool) -> Vec<Gate> {
    let m = controls.len();
    let k = 1usize << m;
    assert_eq!(angles.len(), k, "one angle per control value");
    let gray = |j: usize| j ^ (j >> 1);
    let mut out = Vec::with_capacity(2 * k);
    for j in 0..k {
        let g = gray(j);
        let a: f64 = (0..k)
            .map(|c| {
                if (c & g).count_ones() % 2 == 0 {
                    angles[c]
                } else {
                    -angles[c]
                }
            })
            .sum::<f64>()
            / k as f64;
        out.push(Gate::ry(target, a));
        if m > 0 && !(omit_last_cz && j == k - 1) {
            let bit = (g ^ gray((j + 1) % k)).trailing_zeros() as usize;
            out.push(Gate::cz(target, controls[bit]));
        }
    }
    out
}

/// Prepares a real unit vector on `k = log2(len)` qubits from `|0…0⟩`.
/// Qubit `k−1` holds the most significant bit.
pub fn state_prep_tree(v: &[f64]) -> Vec<Gate> {
    let k = v.len().trailing_zeros() as usize;
    let qubit = |pos: usize| k - 1 - pos;
    let mut gates = Vec::new();
    for level in 0..k {
        let span = 1usize << (k - level);
        let half = span / 2;
        let angles: Vec<f64> = (0..1usize << level)
            .map(|c| {
                let chunk = &v[c * span..(c + 1) * span];
                if level + 1 == k {
                    2.0 * chunk[1].atan2(chunk[0])
                } else {
                    let n0 = chunk[..half].iter().map(|x| x * x).sum::<f64>().sqrt();
                    let n1 = chunk[half..].iter().map(|x| x * x).sum::<f64>().sqrt();
                    2.0 * n1.atan2(n0)
                }
            })
            .collect();
        let controls: Vec<usize> = (0..level).map(|b| qubit(level - 1 - b)).collect();
        gates.extend(mux_ry(qubit(level), &controls, &angles, false));
    }
    gates
}

/// Two-CNOT template on the pair (`high`, `low`).
fn so4_gates(high: usize, low: usize, a: &[f64; 6]) -> Vec<Gate> {
    vec![
        Gate::ry(high, a[0]),
        Gate::ry(low, a[1]),
        Gate::cx(low, high),
        Gate::ry(high, a[2]),
        Gate::ry(low, a[3]),
        Gate::cx(low, high),
        Gate::ry(high, a[4]),
        Gate::ry(low, a[5]),
    ]
}

/// Blocks of the view re-embedded at bond dimension 4.
fn bond_four_blocks(view: &MTensorView) -> Result<Vec<Mat>> {
    let n = view.n_qubits;
    if view.bond_dims.iter().any(|&r| r > 4) {
        return Err(Error::UnsupportedConfiguration(
            "circuit synthesis handles bond dimension at most 4".into(),
        ));
    }
    let dims = bond_dims(n, 4);
    view.blocks
        .iter()
        .enumerate()
        .map(|(s, b)| {
            let (r_in, r_out) = (b.in_dim, b.out_dim / 2);
            let (big_in, big_out) = (dims[s], dims[s + 1]);
            let mut m = Mat::zeros(2 * big_out, big_in);
            for bit in 0..2 {
                for al in 0..r_out {
                    for a in 0..r_in {
                        m[(bit * big_out + al, a)] = b.get(bit * r_out + al, a);
                    }
                }
            }
            let fill: Vec<usize> = (r_in..big_in).collect();
            complete_columns(&mut m, &fill);
            Ok(m)
        })
        .collect()
}

struct Block {
    site: usize,
    gates: Vec<Gate>,
    report: BlockReport,
}

/// Factors one merged 8×4 block (local qubits: 0 = rotation qubit, 1 and 2
/// the pair, 2 most significant). Returns the gates and the right factor
/// still to be pushed into the preceding block.
fn factor_block(site: usize, merged: &Mat, opts: &SynthesisOptions) -> Result<(Block, Mat)> {
    let mut csd = csd_2by1(merged, RotationQubit::LeastSignificant)?;
    if csd.b0.determinant() < 0.0 {
        for m in [&mut csd.b0, &mut csd.b1] {
            let c = -m.column(0).into_owned();
            m.set_column(0, &c);
        }
        let r = -csd.a.row(0).into_owned();
        csd.a.set_row(0, &r);
    }
    if csd.b1.determinant() < 0.0 {
        let c = -csd.b1.column(0).into_owned();
        csd.b1.set_column(0, &c);
        csd.theta[0] = -csd.theta[0];
    }
    // The multiplexor below leaves a CZ between the rotation qubit and the
    // top pair qubit; undo it inside the rotation-qubit-set branch.
    let z_top = Mat::from_diagonal(&nalgebra::DVector::from_row_slice(&[1.0, 1.0, -1.0, -1.0]));
    let b1 = &csd.b1 * z_top;
    let cart = cartan_d(&csd.b0, &b1)?;

    let seed = opts.seed ^ (site as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let fc = fit_so4(&cart.c, seed, opts.max_restarts, 0.01 * opts.tolerance);
    let fd = fit_so4(
        &cart.d,
        seed ^ 0xd1b5_4a32_d192_ed03,
        opts.max_restarts,
        0.01 * opts.tolerance,
    );
    for (name, f) in [("first", &fc), ("second", &fd)] {
        if f.distance > opts.tolerance {
            return Err(Error::SynthesisFailure(format!(
                "block {site}: {name} SO(4) fit stopped at distance {:.3e}",
                f.distance
            )));
        }
    }

    let taus: Vec<f64> = csd.theta.iter().map(|t| -2.0 * t).collect();
    let mut gates = mux_ry(0, &[1, 2], &taus, true);
    gates.extend(so4_gates(2, 1, &fc.angles));
    let (p0, p1) = (cart.phi[0], cart.phi[1]);
    gates.extend([
        Gate::cz(0, 1),
        Gate::ry(1, p0 + p1),
        Gate::cz(1, 2),
        Gate::ry(1, p0 - p1),
        Gate::cz(1, 2),
        Gate::cz(0, 1),
    ]);
    gates.extend(so4_gates(2, 1, &fd.angles));

    let frag = GateList {
        n_qubits: 3,
        gates: gates.clone(),
        provenance: Vec::new(),
    };
    let u = frag.real_unitary()?;
    let target = merged * csd.a.transpose();
    let mut err = 0.0;
    for i in 0..4 {
        for r in 0..8 {
            err += (u[(r, 2 * i)] - target[(r, i)]).powi(2);
        }
    }
    let frobenius = err.sqrt();
    if frobenius > opts.tolerance {
        return Err(Error::SynthesisFailure(format!(
            "block {site}: circuit differs from its target by {frobenius:.3e}"
        )));
    }
    let report = BlockReport {
        site,
        frobenius,
        csd_angles: csd.theta.clone(),
        cartan_angles: cart.phi,
    };
    Ok((Block { site, gates, report }, csd.a))
}

/// Emits a gate list preparing the state of `view` from `|0…0⟩`.
///
/// Positions count from the most significant qubit; position `p` becomes
/// gate qubit `n − 1 − p`.
pub fn synthesize(view: &MTensorView, opts: &SynthesisOptions) -> Result<(GateList, SynthesisReport)> {
    let n = view.n_qubits;
    let mut list = GateList::new(n);
    let mut reports = Vec::new();
    if n <= 3 {
        let state = view.state()?;
        list.extend(state_prep_tree(&state), "state-prep");
    } else {
        let m = bond_four_blocks(view)?;
        let mut merged = kron(&eye(4), &m[n - 1]) * kron(&eye(2), &m[n - 2]) * &m[n - 3];
        let mut blocks = Vec::new();
        let mut terminal = None;
        for s in (1..=n - 3).rev() {
            if s == 1 {
                let mut wide = Mat::zeros(8, 4);
                wide.set_column(0, &merged.column(0));
                wide.set_column(2, &merged.column(1));
                complete_columns(&mut wide, &[1, 3]);
                merged = wide;
            }
            let (block, a) = factor_block(s, &merged, opts)?;
            blocks.push(block);
            let a_wide = kron(&eye(2), &a);
            if s > 1 {
                merged = a_wide * &m[s - 1];
            } else {
                let top = kron(&m[0], &Mat::from_column_slice(2, 1, &[1.0, 0.0]));
                terminal = Some(a_wide * top);
            }
        }
        let v = terminal.expect("chain reaches the first block");
        let shift = n - 3;
        list.extend(
            state_prep_tree(v.as_slice()).iter().map(|g| g.shifted(shift)),
            "state-prep",
        );
        for b in blocks.iter().rev() {
            let label = format!("block-{}", b.site);
            list.extend(b.gates.iter().map(|g| g.shifted(n - 3 - b.site)), &label);
            reports.push(b.report.clone());
        }
    }

    let state_fidelity = if n <= 20 {
        let mut psi = vec![0.0; 1 << n];
        psi[0] = 1.0;
        list.apply_real(&mut psi)?;
        let target = view.state()?;
        let ov: f64 = psi.iter().zip(&target).map(|(a, b)| a * b).sum();
        Some(ov * ov)
    } else {
        None
    };
    let report = SynthesisReport {
        n_qubits: n,
        template: "two-cnot SO(4) pair blocks, 18 rotations per merged block".into(),
        rotation_count: list.rotation_count(),
        expected_rotation_count: if n >= 4 {
            cost::template_rotation_count(n)
        } else {
            (1 << n) - 1
        },
        budget_rotation_count: if n >= 4 { cost::rotation_count(n) } else { (1 << n) - 1 },
        cz_count: list.count(super::gates::GateKind::CZ),
        cx_count: list.count(super::gates::GateKind::CX),
        blocks: reports,
        log2_inv_eps: opts.log2_inv_eps,
        t_cost_budget: cost::t_cost(n, opts.log2_inv_eps),
        t_cost_emitted: list.rotation_count() as f64 * cost::t_per_rotation(opts.log2_inv_eps),
        state_fidelity,
    };
    Ok((list, report))
}

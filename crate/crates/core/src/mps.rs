//! Matrix product state compression of amplitude vectors.
//!
//! Site `k` (0-based, site 0 is the most significant qubit) holds a tensor of
//! shape `r_k × 2·r_{k+1}`, stored row-major with column index `s·r_{k+1} + α`.
//! Every site except the first has orthonormal rows; the first carries the
//! norm, which is forced to one.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::{check_unit_norm, log2_exact, MAX_QUBITS};

/// Entries below this magnitude are treated as zero when fixing gauge signs.
const SIGN_ZERO: f64 = 1e-13;

/// Singular values at one cut, split into the kept and discarded parts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CutSpectrum {
    pub kept: Vec<f64>,
    pub discarded: Vec<f64>,
}

impl CutSpectrum {
    pub fn discarded_weight(&self) -> f64 {
        self.discarded.iter().map(|s| s * s).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mps {
    pub n_qubits: usize,
    pub chi: usize,
    /// `n_qubits + 1` entries; the outer two are 1.
    pub bond_dims: Vec<usize>,
    pub tensors: Vec<Vec<f64>>,
    /// Spectrum at the cut left of site `k`, for `k = 1..n`, in that order.
    #[serde(default)]
    pub cuts: Vec<CutSpectrum>,
    /// A kept and a discarded singular value coincided at some cut.
    #[serde(default)]
    pub degenerate_truncation: bool,
}

/// Bond dimensions `min(2^k, 2^(n−k), χ)`.
pub fn bond_dims(n_qubits: usize, chi: usize) -> Vec<usize> {
    (0..=n_qubits)
        .map(|k| {
            let left = 1usize << k.min(n_qubits - k).min(62);
            left.min(chi)
        })
        .collect()
}

fn svd_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let m = DMatrix::from_row_slice(rows, cols, data);
    let svd = crate::svd::svd(&m)?;
    let (u, vt, sv) = (svd.u, svd.v_t, svd.singular_values);
    if sv.iter().any(|s| !s.is_finite()) {
        return Err(Error::ComputationFailure("non-finite singular value".into()));
    }
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap());
    let u = DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let vt = DMatrix::from_fn(order.len(), vt.ncols(), |i, j| vt[(order[i], j)]);
    let sv = order.iter().map(|&i| sv[i]).collect();
    Ok((u, sv, vt))
}

impl Mps {
    /// Compresses a unit-norm vector of `2^n` amplitudes, keeping at most
    /// `chi` singular values at every cut (right-to-left SVD sweep).
    pub fn from_state(amplitudes: &[f64], chi: usize) -> Result<Mps> {
        let len = amplitudes.len();
        let n = log2_exact(len)
            .ok_or_else(|| Error::InvalidArgument(format!("state length {len} is not a power of two")))?;
        if n == 0 {
            return invalid("state needs at least one qubit");
        }
        if n > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{n} qubits exceed the {MAX_QUBITS}-qubit limit"
            )));
        }
        if chi == 0 {
            return invalid("bond dimension must be positive");
        }
        check_unit_norm(amplitudes, "state")?;

        let dims = bond_dims(n, chi);
        let mut tensors = vec![Vec::new(); n];
        let mut cuts = vec![CutSpectrum::default(); n - 1];
        let mut degenerate = false;
        let mut rem = amplitudes.to_vec();
        for k in (1..n).rev() {
            let rows = 1usize << k;
            let cols = 2 * dims[k + 1];
            let (u, sv, vt) = svd_row_major(rows, cols, &rem)?;
            let r = dims[k];
            if sv.len() > r && sv[r - 1] > 0.0 && sv[r - 1] - sv[r] <= 1e-12 * sv[0] {
                degenerate = true;
            }
            let mut w = vec![0.0; r * cols];
            let mut next = vec![0.0; rows * r];
            for a in 0..r {
                let row = vt.row(a);
                let sign = row.iter().find(|x| x.abs() > SIGN_ZERO).map_or(1.0, |x| x.signum());
                for c in 0..cols {
                    w[a * cols + c] = sign * row[c];
                }
                for i in 0..rows {
                    next[i * r + a] = sign * u[(i, a)] * sv[a];
                }
            }
            tensors[k] = w;
            cuts[k - 1] = CutSpectrum {
                kept: sv[..r].to_vec(),
                discarded: sv[r..].to_vec(),
            };
            // Row-major (rows × r) is already (rows/2 × 2r) with index s·r + α.
            rem = next;
        }
        let nrm = rem.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(nrm > 0.0) {
            return Err(Error::ComputationFailure("truncation removed the whole state".into()));
        }
        rem.iter_mut().for_each(|x| *x /= nrm);
        tensors[0] = rem;
        Ok(Mps {
            n_qubits: n,
            chi,
            bond_dims: dims,
            tensors,
            cuts,
            degenerate_truncation: degenerate,
        })
    }

    /// Full amplitude vector.
    pub fn to_state(&self) -> Result<Vec<f64>> {
        if self.n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{} qubits exceed the dense limit",
                self.n_qubits
            )));
        }
        let mut cur = self.tensors[0].clone();
        let mut rows = 2;
        for k in 1..self.n_qubits {
            let r_in = self.bond_dims[k];
            let cols = 2 * self.bond_dims[k + 1];
            let w = &self.tensors[k];
            let mut next = vec![0.0; rows * cols];
            for i in 0..rows {
                let out = &mut next[i * cols..(i + 1) * cols];
                for a in 0..r_in {
                    let c = cur[i * r_in + a];
                    if c != 0.0 {
                        for (o, wv) in out.iter_mut().zip(&w[a * cols..(a + 1) * cols]) {
                            *o += c * wv;
                        }
                    }
                }
            }
            cur = next;
            rows *= 2;
        }
        Ok(cur)
    }

    /// `⟨mps|ψ⟩`, contracted site by site without forming the MPS vector.
    pub fn overlap_with(&self, amplitudes: &[f64]) -> Result<f64> {
        if amplitudes.len() != 1usize << self.n_qubits {
            return invalid(format!(
                "state length {} does not match {} qubits",
                amplitudes.len(),
                self.n_qubits
            ));
        }
        let mut cur = amplitudes.to_vec();
        for k in (0..self.n_qubits).rev() {
            let r = self.bond_dims[k];
            let cols = 2 * self.bond_dims[k + 1];
            let rows = cur.len() / cols;
            let w = &self.tensors[k];
            let mut next = vec![0.0; rows * r];
            for i in 0..rows {
                let src = &cur[i * cols..(i + 1) * cols];
                for a in 0..r {
                    next[i * r + a] = src.iter().zip(&w[a * cols..(a + 1) * cols]).map(|(x, y)| x * y).sum();
                }
            }
            cur = next;
        }
        Ok(cur[0])
    }

    /// `|⟨mps|ψ⟩|²` for a unit-norm `ψ`.
    pub fn fidelity_with(&self, amplitudes: &[f64]) -> Result<f64> {
        check_unit_norm(amplitudes, "state")?;
        Ok(self.overlap_with(amplitudes)?.powi(2))
    }

    /// Sum of discarded squared singular values over all cuts.
    pub fn discarded_weight(&self) -> f64 {
        self.cuts.iter().map(CutSpectrum::discarded_weight).sum()
    }

    /// The tensor of site `k` as a `2·r_{k+1} × r_k` isometry (rows `s·r + α`).
    pub fn isometry(&self, k: usize) -> Vec<f64> {
        let r_in = self.bond_dims[k];
        let out = 2 * self.bond_dims[k + 1];
        let w = &self.tensors[k];
        let mut m = vec![0.0; out * r_in];
        for a in 0..r_in {
            for c in 0..out {
                m[c * r_in + a] = w[a * out + c];
            }
        }
        m
    }

    pub fn m_tensor_view(&self) -> Result<MTensorView> {
        MTensorView::new(self)
    }
}

/// `|⟨a|b⟩|²` for two real unit-norm vectors.
pub fn fidelity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return invalid(format!("length mismatch: {} vs {}", a.len(), b.len()));
    }
    check_unit_norm(a, "first state")?;
    check_unit_norm(b, "second state")?;
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().powi(2))
}

/// Fidelity of `ψ_D` with `ψ_2D` once the least significant qubit of the
/// longer state is traced out: `Σ_b (Σ_i ψ_D[i]·ψ_2D[2i+b])²`.
pub fn reduced_convergence_fidelity(short: &[f64], long: &[f64]) -> Result<f64> {
    if long.len() != 2 * short.len() {
        return invalid(format!(
            "second state must be twice as long ({} vs {})",
            long.len(),
            short.len()
        ));
    }
    check_unit_norm(short, "shorter state")?;
    check_unit_norm(long, "longer state")?;
    let mut acc = [0.0f64; 2];
    for (i, &s) in short.iter().enumerate() {
        acc[0] += s * long[2 * i];
        acc[1] += s * long[2 * i + 1];
    }
    Ok(acc[0] * acc[0] + acc[1] * acc[1])
}

/// One site of the MPS written as an isometry on consecutive qubits.
///
/// Positions count from the most significant qubit (position 0). The block
/// reads `log2(in_dim)` qubits starting at `first_position`, takes fresh
/// `|0⟩` ancillas on the remaining positions of its span, and writes
/// `log2(out_dim)` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MBlock {
    pub site: usize,
    pub first_position: usize,
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `out_dim × in_dim`.
    pub matrix: Vec<f64>,
}

impl MBlock {
    pub fn width(&self) -> usize {
        self.out_dim.trailing_zeros() as usize
    }

    pub fn input_width(&self) -> usize {
        self.in_dim.trailing_zeros() as usize
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.in_dim + col]
    }
}

/// The MPS as a sequence of isometries, ready for circuit synthesis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MTensorView {
    pub n_qubits: usize,
    pub bond_dims: Vec<usize>,
    pub blocks: Vec<MBlock>,
}

impl MTensorView {
    pub fn new(mps: &Mps) -> Result<Self> {
        if let Some(&bad) = mps.bond_dims.iter().find(|r| !r.is_power_of_two()) {
            return Err(Error::UnsupportedConfiguration(format!(
                "bond dimension {bad} is not a power of two"
            )));
        }
        let blocks = (0..mps.n_qubits)
            .map(|k| MBlock {
                site: k,
                first_position: k,
                in_dim: mps.bond_dims[k],
                out_dim: 2 * mps.bond_dims[k + 1],
                matrix: mps.isometry(k),
            })
            .collect();
        Ok(MTensorView {
            n_qubits: mps.n_qubits,
            bond_dims: mps.bond_dims.clone(),
            blocks,
        })
    }

    /// Largest number of qubits any block touches.
    pub fn max_block_width(&self) -> usize {
        self.blocks.iter().map(MBlock::width).max().unwrap_or(0)
    }

    /// Applies every block in order to `|0…0⟩`.
    pub fn state(&self) -> Result<Vec<f64>> {
        let n = self.n_qubits;
        if n > MAX_QUBITS {
            return Err(Error::Capacity(format!("{n} qubits exceed the dense limit")));
        }
        let mut psi = vec![0.0; 1 << n];
        psi[0] = 1.0;
        for b in &self.blocks {
            apply_block(&mut psi, n, b);
        }
        Ok(psi)
    }
}

/// Applies an isometry block to a dense register (positions MSB-first).
pub(crate) fn apply_block(psi: &mut [f64], n: usize, b: &MBlock) {
    let w = b.width();
    let anc = w - b.input_width();
    let shift = n - b.first_position - w;
    let mask = ((1usize << w) - 1) << shift;
    let mut sub_in = vec![0.0; b.in_dim];
    for base in 0..psi.len() {
        if base & mask != 0 {
            continue;
        }
        for (c, v) in sub_in.iter_mut().enumerate() {
            *v = psi[base | ((c << anc) << shift)];
        }
        for r in 0..b.out_dim {
            let row = &b.matrix[r * b.in_dim..(r + 1) * b.in_dim];
            psi[base | (r << shift)] = row.iter().zip(&sub_in).map(|(x, y)| x * y).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_state(n: usize) -> Vec<f64> {
        let len = 1 << n;
        let mut v: Vec<f64> = (0..len)
            .map(|i| ((i as f64) * 0.37).sin() + 0.2 * ((i * i) as f64 * 0.01).cos())
            .collect();
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= nrm);
        v
    }

    #[test]
    fn exact_at_full_rank() {
        let psi = test_state(6);
        let m = Mps::from_state(&psi, 8).unwrap();
        let back = m.to_state().unwrap();
        let err = psi.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13);
        assert!(m.discarded_weight() < 1e-28);
    }

    #[test]
    fn rows_orthonormal_and_gauge_fixed() {
        let psi = test_state(7);
        let m = Mps::from_state(&psi, 2).unwrap();
        for k in 1..m.n_qubits {
            let r = m.bond_dims[k];
            let c = 2 * m.bond_dims[k + 1];
            let w = &m.tensors[k];
            for a in 0..r {
                let first = w[a * c..(a + 1) * c].iter().find(|x| x.abs() > SIGN_ZERO).unwrap();
                assert!(*first > 0.0);
                for b in 0..r {
                    let dot: f64 = (0..c).map(|j| w[a * c + j] * w[b * c + j]).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn streaming_overlap_matches_dense() {
        let psi = test_state(8);
        let m = Mps::from_state(&psi, 2).unwrap();
        let dense = fidelity(&m.to_state().unwrap(), &psi).unwrap();
        let streamed = m.fidelity_with(&psi).unwrap();
        assert!((dense - streamed).abs() < 1e-14);
    }

    #[test]
    fn view_state_matches_contraction() {
        for chi in [1usize, 2, 4] {
            let psi = test_state(7);
            let m = Mps::from_state(&psi, chi).unwrap();
            let v = m.m_tensor_view().unwrap();
            let a = v.state().unwrap();
            let b = m.to_state().unwrap();
            let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err < 1e-13, "chi {chi}: {err}");
        }
    }

    #[test]
    fn view_rejects_non_power_of_two_bonds() {
        let m = Mps::from_state(&test_state(6), 3).unwrap();
        assert!(matches!(m.m_tensor_view(), Err(Error::UnsupportedConfiguration(_))));
    }

    #[test]
    fn block_shapes_for_bond_four() {
        let m = Mps::from_state(&test_state(8), 4).unwrap();
        let v = m.m_tensor_view().unwrap();
        let shapes: Vec<(usize, usize)> = v.blocks.iter().map(|b| (b.out_dim, b.in_dim)).collect();
        assert_eq!(shapes[0], (4, 1));
        assert_eq!(shapes[1], (8, 2));
        for s in &shapes[2..6] {
            assert_eq!(*s, (8, 4));
        }
        assert_eq!(shapes[6], (4, 4));
        assert_eq!(shapes[7], (2, 2));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Mps::from_state(&[0.6, 0.8, 0.0], 2).is_err());
        assert!(Mps::from_state(&[0.6, 0.6, 0.0, 0.0], 2).is_err());
        assert!(Mps::from_state(&[0.6, 0.8, 0.0, 0.0], 0).is_err());
    }
}

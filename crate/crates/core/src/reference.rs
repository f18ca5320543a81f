//! Reference comparison data: MPS infidelities and state-preparation costs.
//!
//! The infidelity grid was produced with the [`crate::dpss::Bandwidth::Reference`]
//! window scaling. The cost rows other than `mps_t` are fixed numbers from
//! other preparation methods, kept only for side-by-side output.

use serde::{Deserialize, Serialize};

const RAW: &str = include_str!("../assets/reference.json");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InfidelityRow {
    pub n: usize,
    pub chi2: [f64; 3],
    pub chi4: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InfidelityTable {
    pub deltas: [f64; 3],
    pub rows: Vec<InfidelityRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostRow {
    pub n: usize,
    pub mps_t: [u64; 6],
    pub gr_toffoli: [u64; 6],
    pub mps_toffoli: [u64; 6],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CostTable {
    pub log2_inv_eps: [f64; 6],
    pub rows: Vec<CostRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceData {
    /// Bumped whenever an embedded value changes.
    pub version: u32,
    pub infidelity: InfidelityTable,
    pub t_cost: CostTable,
}

pub fn reference_data() -> ReferenceData {
    serde_json::from_str(RAW).expect("embedded reference data is valid")
}

impl InfidelityTable {
    /// Reference value for `n` qubits, bond dimension 2 or 4, and `delta`.
    /// Rows above 12 qubits repeat the 12-qubit row.
    pub fn lookup(&self, n: usize, chi: usize, delta: f64) -> Option<f64> {
        let col = self.deltas.iter().position(|d| (d / delta - 1.0).abs() < 1e-9)?;
        let key = n.min(12);
        let row = self.rows.iter().find(|r| r.n == key)?;
        match chi {
            2 => Some(row.chi2[col]),
            4 => Some(row.chi4[col]),
            _ => None,
        }
    }
}

//! Optimal-confidence control states for quantum phase estimation.
//!
//! The crate builds discrete prolate spheroidal sequence (DPSS) windows,
//! compresses them into low bond-dimension matrix product states, turns
//! those into gate lists, and checks the resulting estimators by simulation.
//!
//! * [`dpss`]: windows, half-width solving and padding.
//! * [`mps`]: SVD compression and the isometry view used for circuits.
//! * [`analysis`]: confidence of arbitrary states and trade-off curves.
//! * [`synth`]: cosine-sine and Cartan decompositions, gate emission, costs.
//! * [`sim`]: state-vector and semiclassical phase-estimation simulation.
//! * [`io`]: file formats shared with the command-line tool.

pub mod analysis;
pub mod dpss;
pub mod error;
pub mod io;
pub mod mps;
pub mod reference;
pub mod sim;
mod svd;
pub mod synth;
pub mod toeplitz;
mod tridiag;

pub use error::{Error, Result};

/// Largest register handled by the dense state-vector code paths.
pub const MAX_QUBITS: usize = 26;

/// Tolerance used when checking that an input vector has unit norm.
pub const NORM_TOL: f64 = 1e-10;

pub(crate) fn check_unit_norm(v: &[f64], what: &str) -> Result<()> {
    let nrm: f64 = v.iter().map(|x| x * x).sum::<f64>();
    if !nrm.is_finite() || (nrm.sqrt() - 1.0).abs() > NORM_TOL {
        return error::invalid(format!("{what} must have unit norm (got {})", nrm.sqrt()));
    }
    Ok(())
}

pub(crate) fn log2_exact(n: usize) -> Option<usize> {
    if n.is_power_of_two() {
        Some(n.trailing_zeros() as usize)
    } else {
        None
    }
}

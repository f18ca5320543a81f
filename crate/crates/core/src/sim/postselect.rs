use serde::{Deserialize, Serialize};

use crate::dpss::PaddedWindow;
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Postselected {
    pub success_probability: f64,
    pub offset: usize,
    pub dim: usize,
    /// The kept slice renormalized and moved to start at index 0; same
    /// length as the input.
    pub kept_state: Vec<f64>,
}

impl Postselected {
    pub fn window(&self) -> &[f64] {
        &self.kept_state[..self.dim]
    }
}

/// Keeps the amplitudes with `offset ≤ k < offset + dim`, as measuring the
/// inequality on an ancilla would, and renormalizes.
pub fn postselect_range(amplitudes: &[f64], offset: usize, dim: usize) -> Result<Postselected> {
    if dim == 0 || offset + dim > amplitudes.len() {
        return invalid(format!(
            "range [{offset}, {}) does not fit {} amplitudes",
            offset + dim,
            amplitudes.len()
        ));
    }
    let slice = &amplitudes[offset..offset + dim];
    let p: f64 = slice.iter().map(|x| x * x).sum();
    if !(p > 0.0) {
        return invalid("post-selected region has zero weight");
    }
    let total: f64 = amplitudes.iter().map(|x| x * x).sum();
    let mut kept_state = vec![0.0; amplitudes.len()];
    let s = 1.0 / p.sqrt();
    for (k, v) in slice.iter().enumerate() {
        kept_state[k] = v * s;
    }
    Ok(Postselected {
        success_probability: p / total,
        offset,
        dim,
        kept_state,
    })
}

/// [`postselect_range`] on the window region of a padded window.
pub fn inequality_postselect(padded: &PaddedWindow) -> Result<Postselected> {
    postselect_range(&padded.amplitudes, padded.offset, padded.dim)
}

//! Rotation counts and T-gate estimates.

/// Rotations for the 17-per-block variant: `24 + 17(n − 4)`.
pub fn rotation_count(n: usize) -> usize {
    assert!(n >= 4, "the merged chain needs at least 4 qubits");
    24 + 17 * (n - 4)
}

/// Rotations emitted by [`super::synthesize`]: `25 + 18(n − 4)`.
pub fn template_rotation_count(n: usize) -> usize {
    assert!(n >= 4, "the merged chain needs at least 4 qubits");
    25 + 18 * (n - 4)
}

/// Expected T gates per arbitrary rotation at precision `2^−L`.
pub fn t_per_rotation(log2_inv_eps: f64) -> f64 {
    0.56 * log2_inv_eps + 4.86
}

/// `9.52·n·L + 82.62·n − 24.64·L − 213.84`, i.e. [`rotation_count`] times
/// [`t_per_rotation`].
pub fn t_cost(n: usize, log2_inv_eps: f64) -> f64 {
    let (n, l) = (n as f64, log2_inv_eps);
    9.52 * n * l + 82.62 * n - 24.64 * l - 213.84
}

/// [`t_cost`] rounded up to a whole gate count.
pub fn t_count(n: usize, log2_inv_eps: f64) -> u64 {
    t_cost(n, log2_inv_eps).ceil() as u64
}

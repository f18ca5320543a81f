//! The sinc kernel and fast products with its Toeplitz matrix.
//!
//! The concentration operator of half-width `d` on `D` points is the
//! symmetric Toeplitz matrix with entries `(d/π)·sinc(d(j−k))`. Products with
//! it are done by circulant embedding and FFT.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

/// `sin(x)/x`, with a short series near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Kernel value `(d/π)·sinc(d·m)` for integer lag `m`.
#[inline]
pub fn kernel(d: f64, m: i64) -> f64 {
    if m == 0 {
        d / PI
    } else {
        let mf = m as f64;
        (d * mf).sin() / (PI * mf)
    }
}

/// Derivative of [`kernel`] with respect to `d`.
#[inline]
pub fn kernel_derivative(d: f64, m: i64) -> f64 {
    (d * m as f64).cos() / PI
}

/// First column of the dense concentration matrix.
pub fn kernel_column(dim: usize, d: f64) -> Vec<f64> {
    (0..dim as i64).map(|m| kernel(d, m)).collect()
}

/// Dense concentration matrix, row-major. Only meant for small sizes.
pub fn dense_matrix(dim: usize, d: f64) -> Vec<f64> {
    let mut out = vec![0.0; dim * dim];
    for j in 0..dim {
        for k in 0..dim {
            out[j * dim + k] = kernel(d, j as i64 - k as i64);
        }
    }
    out
}

/// Linear convolution `y[m] = Σ_k h[m−k]·x[k]` over all output indices.
pub fn linear_convolve(h: &[f64], x: &[f64]) -> Vec<f64> {
    if h.is_empty() || x.is_empty() {
        return Vec::new();
    }
    let out_len = h.len() + x.len() - 1;
    if h.len().min(x.len()) <= 16 {
        let mut y = vec![0.0; out_len];
        for (i, &hv) in h.iter().enumerate() {
            for (k, &xv) in x.iter().enumerate() {
                y[i + k] += hv * xv;
            }
        }
        return y;
    }
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);

    let mut a: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    a.resize(size, Complex64::new(0.0, 0.0));
    let mut b: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    b.resize(size, Complex64::new(0.0, 0.0));
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (p, q) in a.iter_mut().zip(&b) {
        *p *= q;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    a[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Products with a symmetric Toeplitz matrix given by its first column.
///
/// The matrix is embedded in a circulant of power-of-two length at least
/// `2D − 1`, so one product costs two FFTs of that length.
pub struct ToeplitzOp {
    dim: usize,
    size: usize,
    spectrum: Vec<Complex64>,
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl ToeplitzOp {
    pub fn new(column: &[f64]) -> Self {
        let dim = column.len();
        let size = (2 * dim).saturating_sub(1).max(1).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); size];
        for (m, &c) in column.iter().enumerate() {
            spectrum[m].re = c;
            if m > 0 {
                spectrum[size - m].re = c;
            }
        }
        fwd.process(&mut spectrum);
        ToeplitzOp {
            dim,
            size,
            spectrum,
            fwd,
            inv,
        }
    }

    /// Concentration operator of half-width `d` on `dim` points.
    pub fn concentration(dim: usize, d: f64) -> Self {
        Self::new(&kernel_column(dim, d))
    }

    /// Derivative of the concentration operator with respect to `d`.
    pub fn concentration_derivative(dim: usize, d: f64) -> Self {
        let col: Vec<f64> = (0..dim as i64).map(|m| kernel_derivative(d, m)).collect();
        Self::new(&col)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "vector length must match operator size");
        if self.dim == 1 {
            return vec![self.spectrum[0].re * x[0]];
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        self.fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        buf[..self.dim].iter().map(|c| c.re * scale).collect()
    }

    /// `⟨x|T|x⟩`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let y = self.apply(x);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_branches_agree_near_switch() {
        for &x in &[9.9e-5, 1.0001e-4, -9.99e-5, 0.0] {
            let direct = if x == 0.0 { 1.0 } else { f64::sin(x) / x };
            assert!((sinc(x) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn fft_product_matches_dense() {
        for &dim in &[1usize, 2, 3, 7, 16, 33] {
            let d = 0.37;
            let op = ToeplitzOp::concentration(dim, d);
            let dense = dense_matrix(dim, d);
            let x: Vec<f64> = (0..dim).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
            let y = op.apply(&x);
            for j in 0..dim {
                let want: f64 = (0..dim).map(|k| dense[j * dim + k] * x[k]).sum();
                assert!((y[j] - want).abs() < 1e-12, "dim {dim} row {j}");
            }
        }
    }

    #[test]
    fn linear_convolution_matches_direct() {
        let h: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).sin()).collect();
        let x: Vec<f64> = (0..25).map(|i| (i as f64 * 0.7).cos()).collect();
        let y = linear_convolve(&h, &x);
        for m in 0..y.len() {
            let mut want = 0.0;
            for k in 0..x.len() {
                if m >= k && m - k < h.len() {
                    want += h[m - k] * x[k];
                }
            }
            assert!((y[m] - want).abs() < 1e-12);
        }
    }
}

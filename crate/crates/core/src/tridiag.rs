//! Top eigenpair of a real symmetric tridiagonal matrix.

use crate::error::{Error, Result};

/// Number of eigenvalues strictly below `x`.
fn sturm_count(diag: &[f64], off_sq: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - x - off_sq[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue by Sturm bisection.
pub(crate) fn largest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    if n == 1 {
        return diag[0];
    }
    let off_sq: Vec<f64> = off.iter().map(|b| b * b).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE * scale.max(1.0) * 4.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * scale {
            break;
        }
        if sturm_count(diag, &off_sq, mid, pivmin) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T − shift·I) x = rhs` with partial pivoting, overwriting `rhs`.
fn shifted_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &mut [f64], tiny: f64) {
    let n = diag.len();
    // LU of a tridiagonal with row swaps gives up to two superdiagonals.
    let mut d: Vec<f64> = diag.iter().map(|a| a - shift).collect();
    let mut du: Vec<f64> = off.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut dl: Vec<f64> = off.to_vec();
    let mut swapped = vec![false; n.saturating_sub(1)];

    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = dl[i] / d[i];
            dl[i] = f;
            d[i + 1] -= f * du[i];
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = f;
            let tmp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = tmp - f * d[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            swapped[i] = true;
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    for i in 0..n - 1 {
        if swapped[i] {
            rhs.swap(i, i + 1);
        }
        rhs[i + 1] -= dl[i] * rhs[i];
    }
    rhs[n - 1] /= d[n - 1];
    if n >= 2 {
        rhs[n - 2] = (rhs[n - 2] - du[n - 2] * rhs[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - du[i] * rhs[i + 1] - du2[i] * rhs[i + 2]) / d[i];
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Eigenvector of the largest eigenvalue, by inverse iteration.
pub(crate) fn top_eigenvector(diag: &[f64], off: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = diag.len();
    let lambda = largest_eigenvalue(diag, off);
    if n == 1 {
        return Ok((lambda, vec![1.0]));
    }
    let scale = diag.iter().chain(off).fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tiny = f64::EPSILON * scale;
    let shift = lambda + 4.0 * f64::EPSILON * scale;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..4 {
        shifted_solve(diag, off, shift, &mut v, tiny);
        let nrm = normalize(&mut v);
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::ComputationFailure("inverse iteration broke down".into()));
        }
    }
    Ok((lambda, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn matches_dense_eigensolver() {
        let n = 12;
        let diag: Vec<f64> = (0..n).map(|i| ((i * 5 + 1) % 7) as f64 - 2.5).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| 0.5 + (i % 3) as f64).collect();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = off[i];
                m[(i + 1, i)] = off[i];
            }
        }
        let eig = m.clone().symmetric_eigen();
        let (imax, &want) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let (lam, v) = top_eigenvector(&diag, &off).unwrap();
        assert!((lam - want).abs() < 1e-12);
        let w = eig.eigenvectors.column(imax);
        let dot: f64 = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-12);
    }
}

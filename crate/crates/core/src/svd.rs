//! Thin SVD by one-sided Jacobi rotations.
//!
//! Tall inputs are reduced by a QR factorization first. The rotations stop
//! once every pair of columns is orthogonal to working precision relative
//! to their own norms, so small singular values keep full relative accuracy.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

pub(crate) struct Svd {
    /// `m × k` with orthonormal columns, `k = min(m, n)`.
    pub u: DMatrix<f64>,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// `k × n` with orthonormal rows.
    pub v_t: DMatrix<f64>,
}

pub(crate) fn svd(a: &DMatrix<f64>) -> Result<Svd> {
    let (m, n) = a.shape();
    if m < n {
        let t = svd(&a.transpose())?;
        return Ok(Svd {
            u: t.v_t.transpose(),
            singular_values: t.singular_values,
            v_t: t.u.transpose(),
        });
    }
    if n > 0 && m > 2 * n {
        let qr = a.clone().qr();
        let q = qr.q();
        let r = qr.r();
        let s = jacobi(&r)?;
        return Ok(Svd {
            u: q * s.u,
            singular_values: s.singular_values,
            v_t: s.v_t,
        });
    }
    jacobi(a)
}

fn jacobi(a: &DMatrix<f64>) -> Result<Svd> {
    let (m, n) = a.shape();
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::ComputationFailure("SVD input is not finite".into()));
    }
    let mut u = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    // Rounding keeps |γ|/√(αβ) of order ε for columns far below the
    // largest one, so a bare ε threshold can cycle.
    let tol = (m as f64).sqrt().max(2.0) * f64::EPSILON;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dot(&u.column(q));
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut u, &mut v] {
                    for i in 0..mat.nrows() {
                        let (x, y) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * x - s * y;
                        mat[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::ComputationFailure(format!(
            "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let norms: Vec<f64> = (0..n).map(|j| u.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut uo = DMatrix::zeros(m, n);
    let mut vt = DMatrix::zeros(n, n);
    let mut sv = Vec::with_capacity(n);
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut spare = 0;
    for (j, &src) in order.iter().enumerate() {
        sv.push(norms[src]);
        for i in 0..n {
            vt[(j, i)] = v[(i, src)];
        }
        if norms[src] > tiny {
            let col = u.column(src) / norms[src];
            uo.set_column(j, &col);
            continue;
        }
        // Zero singular value: any unit vector orthogonal to the rest.
        loop {
            if spare >= m {
                return Err(Error::ComputationFailure("SVD basis completion failed".into()));
            }
            let mut col = nalgebra::DVector::zeros(m);
            col[spare] = 1.0;
            spare += 1;
            for _ in 0..2 {
                for k in 0..j {
                    let d = uo.column(k).dot(&col);
                    col -= uo.column(k) * d;
                }
            }
            let nn = col.norm();
            if nn > 0.5 {
                uo.set_column(j, &(col / nn));
                break;
            }
        }
    }
    // Columns set before a completed one are already orthogonal to it;
    // later nonzero ones are orthogonal by convergence.
    Ok(Svd {
        u: uo,
        singular_values: sv,
        v_t: vt,
    })
}

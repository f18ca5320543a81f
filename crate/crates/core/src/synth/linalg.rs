//! Small dense helpers for the 2- and 3-qubit factorizations.

use nalgebra::DMatrix;

pub type Mat = DMatrix<f64>;

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// `R_y(θ) = exp(−iθY/2)`, which is real.
pub fn ry(theta: f64) -> Mat {
    let (s, c) = (0.5 * theta).sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

/// `d/dθ R_y(θ)`.
pub fn ry_prime(theta: f64) -> Mat {
    let (s, c) = (0.5 * theta).sin_cos();
    Mat::from_row_slice(2, 2, &[-0.5 * s, -0.5 * c, 0.5 * c, -0.5 * s])
}

/// `‖AᵀA − I‖_F`.
pub fn orthogonality_defect(a: &Mat) -> f64 {
    (a.transpose() * a - eye(a.ncols())).norm()
}

/// Fills the listed columns with an orthonormal completion of the others.
pub fn complete_columns(m: &mut Mat, fill: &[usize]) {
    let rows = m.nrows();
    let mut basis: Vec<nalgebra::DVector<f64>> = (0..m.ncols())
        .filter(|c| !fill.contains(c))
        .map(|c| m.column(c).into_owned())
        .collect();
    let mut candidate = 0;
    for &c in fill {
        loop {
            let mut v = nalgebra::DVector::<f64>::zeros(rows);
            v[candidate % rows] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for b in &basis {
                    let p = b.dot(&v);
                    v -= b * p;
                }
            }
            let nrm = v.norm();
            if nrm > 1e-6 {
                v /= nrm;
                m.set_column(c, &v);
                basis.push(v);
                break;
            }
            assert!(candidate < 4 * rows, "no completion found");
        }
    }
}

/// Row permutation taking index `i·2 + t` to `t·half + i`.
pub fn lsb_to_msb_rows(m: &Mat) -> Mat {
    let half = m.nrows() / 2;
    Mat::from_fn(m.nrows(), m.ncols(), |r, c| {
        let (t, i) = (r / half, r % half);
        m[(i * 2 + t, c)]
    })
}

/// Inverse of [`lsb_to_msb_rows`].
pub fn msb_to_lsb_rows(m: &Mat) -> Mat {
    let half = m.nrows() / 2;
    Mat::from_fn(m.nrows(), m.ncols(), |r, c| {
        let (i, t) = (r / 2, r % 2);
        m[(t * half + i, c)]
    })
}

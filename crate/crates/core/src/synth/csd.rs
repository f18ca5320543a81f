//! Cosine-sine decomposition of a 2-by-1 block isometry.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::linalg::{lsb_to_msb_rows, orthogonality_defect, Mat};
use crate::error::{invalid, Error, Result};
use crate::svd;

/// Which qubit of the row index carries the rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotationQubit {
    MostSignificant,
    LeastSignificant,
}

/// `M = P·diag(B0, B1)·[C; −S]·A` with `C = diag(cos θ)`, `S = diag(sin θ)`.
///
/// `P` is the identity for [`RotationQubit::MostSignificant`] and the row
/// permutation moving the least significant qubit to the top otherwise.
#[derive(Clone, Debug)]
pub struct Csd {
    pub rotation: RotationQubit,
    pub a: Mat,
    pub theta: Vec<f64>,
    pub b0: Mat,
    pub b1: Mat,
}

impl Csd {
    /// The isometry the factors multiply out to.
    pub fn reconstruct(&self) -> Mat {
        let k = self.theta.len();
        let c = Mat::from_diagonal(&DVector::from_iterator(k, self.theta.iter().map(|t| t.cos())));
        let s = Mat::from_diagonal(&DVector::from_iterator(k, self.theta.iter().map(|t| t.sin())));
        let top = &self.b0 * c * &self.a;
        let bottom = -(&self.b1 * s * &self.a);
        let mut m = Mat::zeros(2 * k, k);
        m.view_mut((0, 0), (k, k)).copy_from(&top);
        m.view_mut((k, 0), (k, k)).copy_from(&bottom);
        match self.rotation {
            RotationQubit::MostSignificant => m,
            RotationQubit::LeastSignificant => super::linalg::msb_to_lsb_rows(&m),
        }
    }
}

/// Decomposes a `2k × k` isometry. Angles come out in `[0, π/2]`.
pub fn csd_2by1(m: &Mat, rotation: RotationQubit) -> Result<Csd> {
    let (rows, k) = m.shape();
    if rows != 2 * k || k == 0 {
        return invalid(format!("expected a 2k × k matrix, got {rows} × {k}"));
    }
    let defect = orthogonality_defect(m);
    if defect > 1e-9 {
        return invalid(format!("input is not an isometry (‖MᵀM − I‖ = {defect:.2e})"));
    }
    let mm = match rotation {
        RotationQubit::MostSignificant => m.clone(),
        RotationQubit::LeastSignificant => lsb_to_msb_rows(m),
    };
    let top = mm.rows(0, k).into_owned();
    let bottom = mm.rows(k, k).into_owned();

    let svd = svd::svd(&top)?;
    let mut b0 = svd.u;
    let vt = svd.v_t;
    let mut v = vt.transpose();
    let mut cvals: Vec<f64> = svd.singular_values.iter().map(|c| c.min(1.0)).collect();
    let mut svals = vec![0.0; k];
    let mut b1 = Mat::zeros(k, k);

    // Columns with cos θ < 1/√2 take B1 from the bottom block directly.
    // The rest have small sines, whose directions are only fixed up to
    // rounding by the top SVD; for those the bottom block is diagonalized
    // by its own SVD and B0 is rebuilt from the top block.
    let (wide, narrow): (Vec<usize>, Vec<usize>) = (0..k).partition(|&i| cvals[i] < FRAC_1_SQRT_2);
    let y = &bottom * &v;
    for &i in &wide {
        svals[i] = y.column(i).norm();
        let col = -y.column(i) / svals[i];
        b1.set_column(i, &col);
    }
    if !narrow.is_empty() {
        let vn = Mat::from_fn(k, narrow.len(), |r, j| v[(r, narrow[j])]);
        let yn = &bottom * &vn;
        let svd = svd::svd(&yn)?;
        let p = svd.u;
        let w = svd.v_t.transpose();
        let vn = vn * w;
        let tv = &top * &vn;
        for (j, &i) in narrow.iter().enumerate() {
            v.set_column(i, &vn.column(j));
            svals[i] = svd.singular_values[j];
            cvals[i] = tv.column(j).norm();
            let col = tv.column(j) / cvals[i];
            b0.set_column(i, &col);
            let col = -p.column(j);
            b1.set_column(i, &col);
        }
        // Vanishing sines leave their B1 columns arbitrary; keep them
        // orthogonal to the determined ones.
        let mut fixed: Vec<usize> = wide.clone();
        let mut order = narrow.clone();
        order.sort_by(|&a, &b| svals[b].total_cmp(&svals[a]));
        let mut fallback = 0;
        for i in order {
            let mut col = b1.column(i).into_owned();
            for _ in 0..2 {
                for &f in &fixed {
                    let q = b1.column(f).dot(&col);
                    col -= b1.column(f) * q;
                }
            }
            while col.norm() < 0.5 {
                if fallback >= k {
                    return Err(Error::ComputationFailure("CSD: basis completion failed".into()));
                }
                col = DVector::zeros(k);
                col[fallback] = 1.0;
                fallback += 1;
                for _ in 0..2 {
                    for &f in &fixed {
                        let q = b1.column(f).dot(&col);
                        col -= b1.column(f) * q;
                    }
                }
            }
            let col = &col / col.norm();
            b1.set_column(i, &col);
            fixed.push(i);
        }
    }
    let theta: Vec<f64> = (0..k).map(|i| svals[i].atan2(cvals[i])).collect();
    let vt = v.transpose();
    let out = Csd {
        rotation,
        a: vt,
        theta,
        b0,
        b1,
    };
    let err = (out.reconstruct() - m).norm();
    if err > 1e-10 {
        return Err(Error::ComputationFailure(format!("CSD reconstruction error {err:.2e}")));
    }
    Ok(out)
}

//! Splitting a qubit-controlled pair of SO(4) operations into two plain
//! SO(4) operations around one multiplexed `Z⊗Y`-type rotation.
//!
//! With the control as the most significant qubit,
//! `diag(B0, B1) = (I₂⊗D)·diag(A(φ), A(−φ))·(I₂⊗C)`, where `A(φ)` applies
//! `R_y(2φ_h)` to the less significant qubit of the pair when the more
//! significant one is `h`.

use nalgebra::linalg::Schur;

use super::linalg::{orthogonality_defect, ry, Mat};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug)]
pub struct Cartan {
    pub c: Mat,
    pub phi: [f64; 2],
    pub d: Mat,
}

/// `A(φ) = R_y(2φ_0) ⊕ R_y(2φ_1)`.
pub fn pair_rotation(phi: [f64; 2]) -> Mat {
    let mut a = Mat::zeros(4, 4);
    a.view_mut((0, 0), (2, 2)).copy_from(&ry(2.0 * phi[0]));
    a.view_mut((2, 2), (2, 2)).copy_from(&ry(2.0 * phi[1]));
    a
}

impl Cartan {
    pub fn reconstruct(&self) -> (Mat, Mat) {
        let b0 = &self.d * pair_rotation(self.phi) * &self.c;
        let b1 = &self.d * pair_rotation([-self.phi[0], -self.phi[1]]) * &self.c;
        (b0, b1)
    }
}

/// Factors `diag(B0, B1)` for `B0, B1 ∈ SO(4)`.
///
/// `B0·B1ᵀ = D·A(2φ)·Dᵀ`, so `D` and `φ` come from the real Schur form of
/// that product; then `C = A(φ)ᵀ·Dᵀ·B0`.
pub fn cartan_d(b0: &Mat, b1: &Mat) -> Result<Cartan> {
    if b0.shape() != (4, 4) || b1.shape() != (4, 4) {
        return invalid("both blocks must be 4 × 4");
    }
    for (name, m) in [("first", b0), ("second", b1)] {
        let defect = orthogonality_defect(m);
        if defect > 1e-9 {
            return invalid(format!("{name} block is not orthogonal (defect {defect:.2e})"));
        }
        let det = m.determinant();
        if det < 0.0 {
            return invalid(format!("{name} block has determinant {det:.3}, expected +1"));
        }
    }
    let q = b0 * b1.transpose();
    let (vecs, t) = Schur::new(q.clone()).unpack();

    // Collect invariant planes: 2×2 blocks directly, ±1 eigenvalues in pairs.
    let mut planes: Vec<(usize, usize)> = Vec::new();
    let mut singles_pos = Vec::new();
    let mut singles_neg = Vec::new();
    let mut i = 0;
    while i < 4 {
        if i + 1 < 4 && t[(i + 1, i)].abs() > 1e-12 {
            planes.push((i, i + 1));
            i += 2;
        } else {
            if t[(i, i)] >= 0.0 {
                singles_pos.push(i);
            } else {
                singles_neg.push(i);
            }
            i += 1;
        }
    }
    if singles_pos.len() % 2 == 1 || singles_neg.len() % 2 == 1 {
        return Err(Error::ComputationFailure(
            "unpaired real eigenvalue in the Cartan step".into(),
        ));
    }
    for s in [singles_pos, singles_neg] {
        for p in s.chunks(2) {
            planes.push((p[0], p[1]));
        }
    }

    let mut d = Mat::zeros(4, 4);
    let mut phi = [0.0; 2];
    for (h, &(a, b)) in planes.iter().enumerate() {
        let alpha = (t[(b, a)] - t[(a, b)]).atan2(t[(a, a)] + t[(b, b)]);
        phi[h] = 0.5 * alpha;
        d.set_column(2 * h, &vecs.column(a));
        d.set_column(2 * h + 1, &vecs.column(b));
    }
    if d.determinant() < 0.0 {
        let flipped = -d.column(1).into_owned();
        d.set_column(1, &flipped);
        phi[0] = -phi[0];
    }
    let c = pair_rotation(phi).transpose() * d.transpose() * b0;
    let out = Cartan { c, phi, d };
    let (r0, r1) = out.reconstruct();
    let err = ((r0 - b0).norm_squared() + (r1 - b1).norm_squared()).sqrt();
    if err > 1e-10 {
        return Err(Error::ComputationFailure(format!(
            "Cartan reconstruction error {err:.2e}"
        )));
    }
    Ok(out)
}

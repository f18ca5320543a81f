//! Angle fitting for the two-CNOT SO(4) template.
//!
//! The template, in time order on a pair (high, low):
//! `R_y(a0)⊗R_y(a1)`, CNOT low→high, `R_y(a2)⊗R_y(a3)`, CNOT low→high,
//! `R_y(a4)⊗R_y(a5)`. Angles are found by damped Gauss-Newton
//! (Levenberg-Marquardt) from seeded random starts.

use nalgebra::{SMatrix, SVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg::{kron, ry, ry_prime, Mat};

pub const N_ANGLES: usize = 6;

/// CNOT with the less significant qubit of the pair as control.
pub fn cnot_low_high() -> Mat {
    let mut m = Mat::zeros(4, 4);
    // |h l⟩ → |h⊕l, l⟩
    for h in 0..2 {
        for l in 0..2 {
            m[(((h ^ l) << 1) | l, (h << 1) | l)] = 1.0;
        }
    }
    m
}

fn layer(a: f64, b: f64, da: bool, db: bool) -> Mat {
    let ma = if da { ry_prime(a) } else { ry(a) };
    let mb = if db { ry_prime(b) } else { ry(b) };
    kron(&ma, &mb)
}

/// Template unitary, optionally differentiated with respect to angle `which`.
pub fn template(angles: &[f64; N_ANGLES], which: Option<usize>) -> Mat {
    let cx = cnot_low_high();
    let l = |k: usize| {
        layer(
            angles[2 * k],
            angles[2 * k + 1],
            which == Some(2 * k),
            which == Some(2 * k + 1),
        )
    };
    l(2) * &cx * l(1) * &cx * l(0)
}

#[derive(Clone, Debug)]
pub struct Fit {
    pub angles: [f64; N_ANGLES],
    pub distance: f64,
}

fn levenberg_marquardt(target: &Mat, start: [f64; N_ANGLES]) -> Fit {
    let resid = |x: &[f64; N_ANGLES]| -> SVector<f64, 16> {
        let u = template(x, None) - target;
        SVector::from_iterator(u.iter().copied())
    };
    let mut x = start;
    let mut r = resid(&x);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    for _ in 0..2000 {
        if cost < 1e-30 {
            break;
        }
        let mut jac = SMatrix::<f64, 16, N_ANGLES>::zeros();
        for p in 0..N_ANGLES {
            let dp = template(&x, Some(p));
            for (i, v) in dp.iter().enumerate() {
                jac[(i, p)] = *v;
            }
        }
        let jtj = jac.transpose() * jac;
        let g = jac.transpose() * r;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj;
            for p in 0..N_ANGLES {
                a[(p, p)] += mu * (1.0 + jtj[(p, p)]);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-g))) else {
                mu *= 10.0;
                continue;
            };
            let mut xn = x;
            for p in 0..N_ANGLES {
                xn[p] += step[p];
            }
            let rn = resid(&xn);
            let cn = rn.norm_squared();
            if cn < cost {
                let rel = (cost - cn) / cost.max(1e-300);
                x = xn;
                r = rn;
                cost = cn;
                mu = (mu / 10.0).max(1e-30);
                improved = rel > 1e-14 || cost > 1e-28;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Fit {
        angles: x,
        distance: cost.sqrt(),
    }
}

/// Fits the template to `target ∈ SO(4)`, restarting until the Frobenius
/// distance is at most `tol` or `max_starts` attempts have been made.
/// Returns the best fit found either way.
pub fn fit_so4(target: &Mat, seed: u64, max_starts: usize, tol: f64) -> Fit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Fit> = None;
    for _ in 0..max_starts.max(1) {
        let mut start = [0.0; N_ANGLES];
        for a in start.iter_mut() {
            *a = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        }
        let f = levenberg_marquardt(target, start);
        if best.as_ref().is_none_or(|b| f.distance < b.distance) {
            best = Some(f);
        }
        if best.as_ref().unwrap().distance <= tol {
            break;
        }
    }
    best.unwrap()
}

use proptest::prelude::*;

use pqpe_core::analysis::confidence;
use pqpe_core::dpss::dpss_window;
use pqpe_core::mps::Mps;

fn unit_state(raw: Vec<f64>) -> Option<Vec<f64>> {
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 1e-3).then(|| raw.iter().map(|x| x / norm).collect())
}

fn state_strategy() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=7)
        .prop_flat_map(|n| prop::collection::vec(-1.0f64..1.0, 1 << n))
        .prop_filter_map("zero vector", unit_state)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dpss_is_positive_symmetric_and_normalized(dim in 1usize..200, frac in 0.05f64..0.95) {
        let d = frac * std::f64::consts::PI;
        let w = dpss_window(dim, d).unwrap();
        let norm: f64 = w.amplitudes.iter().map(|x| x * x).sum();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!(w.amplitudes.iter().all(|&x| x > 0.0));
        for k in 0..dim {
            prop_assert!((w.amplitudes[k] - w.amplitudes[dim - 1 - k]).abs() < 1e-12);
        }
        prop_assert!(w.eigenvalue > 0.0 && w.eigenvalue < 1.0 + 1e-14);
        prop_assert!((confidence(&w.amplitudes, d).unwrap() - w.eigenvalue).abs() < 1e-10);
    }

    #[test]
    fn confidence_grows_with_halfwidth(state in state_strategy(), a in 0.01f64..3.0, b in 0.01f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let cl = confidence(&state, lo).unwrap();
        let ch = confidence(&state, hi).unwrap();
        prop_assert!(cl <= ch + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&cl));
        prop_assert!((confidence(&state, std::f64::consts::PI).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_never_drops_as_chi_grows(state in state_strategy()) {
        let mut last = 0.0;
        for chi in [1, 2, 4, 8, 16] {
            let mps = Mps::from_state(&state, chi).unwrap();
            let f = mps.fidelity_with(&state).unwrap();
            prop_assert!(f >= last - 1e-12, "chi {chi}: {f} < {last}");
            prop_assert!((f - (1.0 - mps.discarded_weight())).abs() < 1e-10);
            last = f;
            let out = mps.to_state().unwrap();
            let norm: f64 = out.iter().map(|x| x * x).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }
        let exact = Mps::from_state(&state, 1 << 7).unwrap().to_state().unwrap();
        for (x, y) in exact.iter().zip(&state) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sites_after_the_first_are_isometries(state in state_strategy(), chi in 1usize..6) {
        let mps = Mps::from_state(&state, chi).unwrap();
        for k in 1..mps.n_qubits {
            let r_in = mps.bond_dims[k];
            let out = 2 * mps.bond_dims[k + 1];
            let m = mps.isometry(k);
            for a in 0..r_in {
                for b in 0..r_in {
                    let dot: f64 = (0..out).map(|c| m[c * r_in + a] * m[c * r_in + b]).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    prop_assert!((dot - want).abs() < 1e-12, "site {k} ({a},{b}): {dot}");
                }
            }
        }
    }

    #[test]
    fn mps_json_round_trips(state in state_strategy(), chi in 1usize..6) {
        let mps = Mps::from_state(&state, chi).unwrap();
        let text = serde_json::to_string(&mps).unwrap();
        let back: Mps = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, mps);
    }
}

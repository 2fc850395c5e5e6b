//! Randomized invariants of the detection engine and mode analysis.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use smf_core::detection::fock::{ModeInput, PairSqueezer, StateSpec};
use smf_core::detection::oracle::{random_gaussian_state, random_unitary};
use smf_core::detection::{coincidence_from_no_click, ClickEvaluator, DetectorSet};
use smf_core::modes::{effective_c, rect_rect_modes};
use smf_core::network::{DetectionMoments, Detector};
use smf_core::CMat;

/// Four-mode Gaussian state, one mode per detector.
fn four_mode_state(seed: u64, nbar: [f64; 2], r: f64, phase: f64) -> DetectionMoments {
    let mut rng = StdRng::seed_from_u64(seed);
    let spec = StateSpec::new(vec![
        ModeInput::Thermal(nbar[0]),
        ModeInput::Vacuum,
        ModeInput::Vacuum,
        ModeInput::Thermal(nbar[1]),
    ])
    .with_pair(PairSqueezer { modes: (1, 2), r, phase })
    .with_unitary(random_unitary(4, &mut rng));
    let (n, m) = spec.gaussian_moments().unwrap();
    DetectionMoments { modes: Detector::ALL.iter().map(|&d| (d, 0)).collect(), normal: n, anomalous: m, tau: 0.0 }
}

fn evaluator(dm: &DetectionMoments, w: [f64; 4], mu: [f64; 4]) -> ClickEvaluator {
    ClickEvaluator::new(dm, &w.map(|x| vec![x]), mu).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn engine_matches_fock_oracle(seed in any::<u64>(), w in prop::array::uniform3(0.0f64..=1.0)) {
        let mut rng = StdRng::seed_from_u64(seed);
        let spec = random_gaussian_state(3, &mut rng);
        let n = spec.n_modes();
        let fock = spec.build().unwrap();
        let (nm, mm) = spec.gaussian_moments().unwrap();
        let dm = DetectionMoments { modes: (0..n).map(|i| (Detector::ALL[i], 0)).collect(), normal: nm, anomalous: mm, tau: 0.0 };
        let mut w4: [Vec<f64>; 4] = Default::default();
        for i in 0..n {
            w4[i] = vec![w[i]];
        }
        let ev = ClickEvaluator::new(&dm, &w4, [0.0; 4]).unwrap();
        for mask in 1u8..(1 << n) {
            let off: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            let a = ev.no_click(DetectorSet(mask)).unwrap();
            let b = fock.no_click(&w[..n], &vec![0.0; n], &off);
            prop_assert!((a - b).abs() < 1e-6, "mask {mask}: {a} vs {b}");
        }
    }

    #[test]
    fn coincidences_obey_probability_bounds(
        seed in any::<u64>(),
        nbar in prop::array::uniform2(0.0f64..0.5),
        r in 0.0f64..0.6,
        phase in 0.0f64..6.28,
        w in prop::array::uniform4(0.0f64..=1.0),
        mu in prop::array::uniform4(0.0f64..0.01),
    ) {
        let ev = evaluator(&four_mode_state(seed, nbar, r, phase), w, mu);
        let e = ev.all_no_click().unwrap();
        let p = |s: DetectorSet| coincidence_from_no_click(&e, s).unwrap();
        for mask in 1u8..16 {
            let s = DetectorSet(mask);
            let ps = p(s);
            prop_assert!((0.0..=1.0).contains(&ps));
            // adding a detector can only lower the joint click probability
            for sub in s.subsets() {
                if sub.0 != 0 {
                    prop_assert!(ps <= p(sub) + 1e-12);
                }
            }
            // Bonferroni lower bound
            let sum: f64 = s.iter().map(|d| p(DetectorSet::of(&[d]))).sum();
            prop_assert!(ps >= sum - (s.len() as f64 - 1.0) - 1e-12);
        }
    }

    #[test]
    fn no_click_falls_with_weight_and_dark_counts(
        seed in any::<u64>(),
        nbar in prop::array::uniform2(0.0f64..0.5),
        r in 0.0f64..0.6,
        w in prop::array::uniform4(0.0f64..0.9),
        bump in 0.0f64..0.1,
        mu in 0.0f64..0.01,
    ) {
        let dm = four_mode_state(seed, nbar, r, 0.3);
        let base = evaluator(&dm, w, [0.0; 4]).all_no_click().unwrap();
        let heavier = evaluator(&dm, w.map(|x| x + bump), [0.0; 4]).all_no_click().unwrap();
        let dark = evaluator(&dm, w, [mu; 4]).all_no_click().unwrap();
        for mask in 1..16usize {
            prop_assert!(heavier[mask] <= base[mask] + 1e-12);
            let k = (mask as u8).count_ones() as i32;
            prop_assert!((dark[mask] - base[mask] * (-mu * k as f64).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_equals_time_bandwidth(b in 2.0f64..40.0, t in 0.2f64..2.0) {
        // rect filter and rect gate: Σχ = BT/2π
        let basis = rect_rect_modes(b, t, 257).unwrap();
        let want = b * t / (2.0 * std::f64::consts::PI);
        prop_assert!((basis.trace() / want - 1.0).abs() < 1e-8, "c = {}", effective_c(b, t));
    }
}

#[test]
fn vacuum_and_zero_weight_never_click() {
    let dm = four_mode_state(1, [0.2, 0.1], 0.4, 0.0);
    let e = evaluator(&dm, [0.0; 4], [0.0; 4]).all_no_click().unwrap();
    assert!(e.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    let vac = DetectionMoments {
        modes: Detector::ALL.iter().map(|&d| (d, 0)).collect(),
        normal: CMat::zeros(4, 4),
        anomalous: CMat::zeros(4, 4),
        tau: 0.0,
    };
    let e = evaluator(&vac, [1.0; 4], [0.0; 4]).all_no_click().unwrap();
    assert!(e.iter().all(|&x| x == 1.0));
}

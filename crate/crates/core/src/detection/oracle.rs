//! Randomized comparison of the Gaussian engine against the Fock oracle.

use super::engine::{ClickEvaluator, DetectorSet};
use super::fock::{ModeInput, PairSqueezer, StateSpec};
use crate::error::Result;
use crate::network::{DetectionMoments, Detector};
use crate::{CMat, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub states: usize,
    /// Number of (state, subset) no-click values compared.
    pub comparisons: usize,
    pub max_deviation: f64,
    /// Description of the worst case.
    pub worst: String,
    /// Largest deviation from `1/(1 + w·n̄)` over the single-mode thermal
    /// checks, engine and oracle alike.
    pub thermal_deviation: f64,
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian
/// matrix, with the phases of R divided out.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let (a, b): (f64, f64) = (rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal));
        C64::new(a, b)
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= ph;
        }
    }
    u
}

/// A random Gaussian state on at most `max_modes` modes.
pub fn random_gaussian_state(max_modes: usize, rng: &mut impl Rng) -> StateSpec {
    let n = rng.random_range(1..=max_modes.clamp(1, 3));
    let mut inputs: Vec<ModeInput> = (0..n)
        .map(|_| match rng.random_range(0..3) {
            0 => ModeInput::Vacuum,
            1 => ModeInput::Thermal(rng.random_range(0.0..0.25)),
            _ => ModeInput::Squeezed { r: rng.random_range(0.0..0.3), phase: rng.random_range(0.0..std::f64::consts::TAU) },
        })
        .collect();
    let mut pairs = Vec::new();
    if n >= 2 && rng.random_bool(0.4) {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        inputs[i] = ModeInput::Vacuum;
        inputs[j] = ModeInput::Vacuum;
        pairs.push(PairSqueezer { modes: (i, j), r: rng.random_range(0.0..0.3), phase: rng.random_range(0.0..std::f64::consts::TAU) });
    }
    let mut spec = StateSpec::new(inputs).with_unitary(random_unitary(n, rng));
    spec.pairs = pairs;
    spec
}

/// Mode i of an `n`-mode state seen by detector i, one mode each.
fn as_detection(n: &CMat, m: &CMat) -> DetectionMoments {
    DetectionMoments {
        modes: (0..n.nrows()).map(|i| (Detector::ALL[i], 0)).collect(),
        normal: n.clone(),
        anomalous: m.clone(),
        tau: 0.0,
    }
}

/// Compare all subset no-click probabilities on `states` random states.
pub fn oracle_check(states: usize, seed: u64) -> Result<OracleReport> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut report = OracleReport {
        states,
        comparisons: 0,
        max_deviation: 0.0,
        worst: String::new(),
        thermal_deviation: 0.0,
    };
    for s in 0..states {
        let spec = random_gaussian_state(3, &mut rng);
        let n = spec.n_modes();
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
        let dark: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..0.01) }).collect();
        let fock = spec.build()?;
        let (nm, mm) = spec.gaussian_moments().expect("Gaussian inputs only");
        let dm = as_detection(&nm, &mm);
        let mut w4: [Vec<f64>; 4] = Default::default();
        let mut mu4 = [0.0; 4];
        for i in 0..n {
            w4[i] = vec![weights[i]];
            mu4[i] = dark[i];
        }
        let ev = ClickEvaluator::new(&dm, &w4, mu4)?;
        for mask in 1u8..(1 << n) {
            let off: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            let e_engine = ev.no_click(DetectorSet(mask))?;
            let e_fock = fock.no_click(&weights, &dark, &off);
            let dev = (e_engine - e_fock).abs();
            report.comparisons += 1;
            if dev > report.max_deviation {
                report.max_deviation = dev;
                report.worst = format!("state {s} ({n} modes), subset {mask:#05b}: engine {e_engine:.12} oracle {e_fock:.12}");
            }
        }
    }
    for &nbar in &[0.01, 0.1, 0.5, 1.0] {
        for &w in &[0.05, 0.3, 0.7, 1.0] {
            let want = 1.0 / (1.0 + w * nbar);
            let mut spec = StateSpec::new(vec![ModeInput::Thermal(nbar)]);
            spec.cutoff = 40;
            let fock = spec.build()?;
            let f = fock.no_click(&[w], &[0.0], &[true]);
            let dm = as_detection(&CMat::from_element(1, 1, C64::new(nbar, 0.0)), &CMat::zeros(1, 1));
            let ev = ClickEvaluator::new(&dm, &[vec![w], vec![], vec![], vec![]], [0.0; 4])?;
            let g = ev.no_click(DetectorSet::of(&[Detector::A]))?;
            report.thermal_deviation = report.thermal_deviation.max((f - want).abs()).max((g - want).abs());
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = StdRng::seed_from_u64(3);
        let u = random_unitary(3, &mut rng);
        let dev = (u.adjoint() * &u - CMat::identity(3, 3)).iter().fold(0.0f64, |s, z| s.max(z.norm()));
        assert!(dev < 1e-12);
    }

    #[test]
    fn small_suite_agrees() {
        let r = oracle_check(20, 11).unwrap();
        assert!(r.max_deviation < 1e-6, "{r:?}");
        assert!(r.thermal_deviation < 1e-10, "{r:?}");
    }
}

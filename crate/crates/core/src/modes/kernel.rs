use super::profile::{FilterProfile, GateProfile};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::{CMat, C64};

/// Spectral correlation kernel `K[m,n] = κ(ωₘ, ωₙ)` (seconds) of a gate
/// followed by a filter.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub grid: FrequencyGrid,
    pub entries: CMat,
}

impl KernelMatrix {
    /// The dimensionless quadratic form `K·δω/2π` of the photon-number
    /// operator on unit-commutator grid modes.
    pub fn scaled(&self) -> CMat {
        &self.entries * C64::new(self.grid.measure(), 0.0)
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }
}

/// `K[m,n] = conj(h(ωₘ))·h(ωₙ)·F(ωₘ − ωₙ)`, made exactly Hermitian.
pub fn build_kernel(filter: &FilterProfile, gate: &GateProfile) -> KernelMatrix {
    let g = filter.grid;
    let n = g.n_points;
    let d = g.spacing();
    // uniform grid: F only depends on m − n
    let table: Vec<C64> = (0..2 * n - 1)
        .map(|k| gate.intensity_transform((k as f64 - (n - 1) as f64) * d))
        .collect();
    let h = &filter.amplitude;
    let mut entries = CMat::from_fn(n, n, |m, k| h[m].conj() * h[k] * table[m + n - 1 - k]);
    linalg::hermitize(&mut entries);
    KernelMatrix { grid: g, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::profile::{make_profile, sinc, FilterShape, GateShape};

    #[test]
    fn rectangular_gate_entries() {
        let g = FrequencyGrid::new(0.0, 8.0, 33).unwrap();
        let f = make_profile(&FilterShape::Gaussian { fwhm: 3.0 }, &g).unwrap();
        let t = 1.3;
        let k = build_kernel(&f, &GateProfile::rectangular(t).unwrap());
        for (m, n) in [(3, 20), (16, 16), (30, 1)] {
            let delta = g.offset(m) - g.offset(n);
            let want = f.amplitude[m].conj() * f.amplitude[n] * t * sinc(0.5 * delta * t);
            assert!((k.entries[(m, n)] - want).norm() < 1e-14);
        }
        for m in 0..33 {
            assert!((k.entries[(m, m)].re - f.amplitude[m].norm_sqr() * t).abs() < 1e-14);
            assert_eq!(k.entries[(m, m)].im, 0.0);
        }
    }

    #[test]
    fn hermitian_for_asymmetric_gate() {
        let g = FrequencyGrid::new(0.0, 8.0, 21).unwrap();
        let f = make_profile(&FilterShape::Gaussian { fwhm: 3.0 }, &g).unwrap();
        let gate = GateProfile::new(GateShape::Tabulated { times: vec![0.0, 0.2, 1.0], amplitude: vec![0.1, 1.0, 0.3] }).unwrap();
        let k = build_kernel(&f, &gate);
        assert_eq!(k.entries, k.entries.adjoint());
    }

    #[test]
    fn zero_filter_gives_zero_kernel() {
        let g = FrequencyGrid::new(0.0, 8.0, 9).unwrap();
        let mut f = make_profile(&FilterShape::Gaussian { fwhm: 3.0 }, &g).unwrap();
        f.amplitude.iter_mut().for_each(|a| *a = C64::new(0.0, 0.0));
        let k = build_kernel(&f, &GateProfile::rectangular(1.0).unwrap());
        assert!(k.entries.iter().all(|z| z.norm() == 0.0));
    }
}

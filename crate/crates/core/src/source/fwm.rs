use super::pump::PumpPulse;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::{CMat, C64};

/// Pump autoconvolution `Φ(Ω) = Σₖ A_p(ωₖ) A_p(Ω − ωₖ) δω` at
/// `Ω = 2·ω_p,lo + (shift + q)·δω` for `q` in `0..len`.
pub(crate) fn autoconvolution(pump: &PumpPulse, shift: i64, len: usize) -> Vec<C64> {
    let a = &pump.amplitude;
    let np = a.len() as i64;
    let d = pump.grid.spacing();
    (0..len as i64)
        .map(|q| {
            let s = shift + q;
            let k_lo = (s - (np - 1)).max(0);
            let k_hi = s.min(np - 1);
            let mut acc = C64::new(0.0, 0.0);
            for k in k_lo..=k_hi {
                acc += a[k as usize] * a[(s - k) as usize];
            }
            acc * d
        })
        .collect()
}

/// Joint spectral amplitude on unit-commutator grid modes,
/// `J[m,n] = ⟨a_s,m a_a,n⟩ = i·γL·δω·Φ(ω_s,m + ω_a,n)` (phase matched).
pub fn fwm_joint_amplitude(
    pump: &PumpPulse,
    gamma_l: f64,
    signal: &FrequencyGrid,
    idler: &FrequencyGrid,
) -> Result<CMat> {
    signal.check_same_spacing(&pump.grid, "signal vs pump")?;
    idler.check_same_spacing(&pump.grid, "idler vs pump")?;
    let d = pump.grid.spacing();
    let mismatch = signal.center + idler.center - 2.0 * pump.grid.center;
    if mismatch.abs() > d {
        return Err(Error::GridMismatch(format!(
            "signal + idler centers differ from twice the pump by {mismatch:.4e} rad/s (> one spacing)"
        )));
    }
    let exact = (signal.lo() + idler.lo() - 2.0 * pump.grid.lo()) / d;
    let shift = exact.round();
    if (exact - shift).abs() > 1e-6 {
        log::warn!("signal/idler sum frequencies off the pump lattice by {:.3} spacings", exact - shift);
    }
    let (ns, na) = (signal.n_points, idler.n_points);
    let phi = autoconvolution(pump, shift as i64, ns + na - 1);
    let pre = C64::new(0.0, gamma_l * d);
    Ok(CMat::from_fn(ns, na, |m, n| pre * phi[m + n]))
}

/// Pair-emission occupation `⟨aₘ†aₘ'⟩` of one band, with the partner
/// photon summed over the whole pump support rather than the partner grid:
/// `(γLδω)² Σ_q conj(Φ_q) Φ_{q+m'−m}`. Phase matching makes this Toeplitz
/// and the same for either band.
pub fn pair_occupation(pump: &PumpPulse, gamma_l: f64, grid: &FrequencyGrid) -> Result<CMat> {
    grid.check_same_spacing(&pump.grid, "band vs pump")?;
    let np = pump.amplitude.len();
    let phi = autoconvolution(pump, 0, 2 * np - 1);
    let n = grid.n_points;
    let scale = (gamma_l * pump.grid.spacing()).powi(2);
    let lag: Vec<C64> = (0..n)
        .map(|d| phi.iter().zip(phi.get(d..).unwrap_or_default()).map(|(a, b)| a.conj() * b).sum::<C64>() * scale)
        .collect();
    Ok(CMat::from_fn(n, n, |m, k| if k >= m { lag[k - m] } else { lag[m - k].conj() }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::pump::{pump_spectrum, PumpShape};

    #[test]
    fn monochromatic_pump_anticorrelates() {
        let g = FrequencyGrid::with_spacing(0.0, 1.0, 3).unwrap();
        let pump = PumpPulse {
            grid: g,
            amplitude: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            shape: PumpShape::Tabulated { offsets: vec![-1.0, 0.0, 1.0], amplitude: vec![0.0, 1.0, 0.0] },
        };
        let s = FrequencyGrid::with_spacing(-5.0, 1.0, 5).unwrap();
        let a = FrequencyGrid::with_spacing(5.0, 1.0, 5).unwrap();
        let j = fwm_joint_amplitude(&pump, 1.0, &s, &a).unwrap();
        for m in 0..5 {
            for n in 0..5 {
                // ω_s,m + ω_a,n = 2ω_p only on the anti-diagonal m + n = 4
                assert_eq!(j[(m, n)].norm() > 0.0, m + n == 4);
            }
        }
    }

    #[test]
    fn gaussian_autoconvolution_width() {
        // amplitude std s gives Φ with std s√2; here s = σ√2 for power std σ
        let sigma = 1.0;
        let fwhm = 2.0 * sigma * (2.0 * std::f64::consts::LN_2).sqrt();
        let shape = PumpShape::Gaussian { fwhm };
        let g = FrequencyGrid::with_spacing(0.0, 0.02, 1201).unwrap();
        let p = pump_spectrum(&shape, 1.0, &g).unwrap();
        let phi = autoconvolution(&p, 0, 2 * 1201 - 1);
        let peak = phi[1200].re;
        for q in [1200 + 50, 1200 + 100, 1200 + 150] {
            let w = (q as f64 - 1200.0) * 0.02;
            let want = peak * (-w * w / (2.0 * 4.0 * sigma * sigma)).exp();
            assert!((phi[q].re - want).abs() < 1e-10 * peak);
        }
    }

    #[test]
    fn occupation_covers_partners_outside_grid() {
        let shape = PumpShape::Gaussian { fwhm: 1.0 };
        let pg = FrequencyGrid::with_spacing(0.0, 0.05, 201).unwrap();
        let p = pump_spectrum(&shape, 1.0, &pg).unwrap();
        let s = FrequencyGrid::with_spacing(-20.0, 0.05, 21).unwrap();
        let n = pair_occupation(&p, 0.7, &s).unwrap();
        // a partner grid wide enough to hold every partner gives conj(J)Jᵀ
        let wide = FrequencyGrid::with_spacing(20.0, 0.05, 421).unwrap();
        let j = fwm_joint_amplitude(&p, 0.7, &s, &wide).unwrap();
        let direct = j.map(|z| z.conj()) * j.transpose();
        assert!((n - &direct).iter().all(|z| z.norm() < 1e-12 * direct[(0, 0)].norm()));
        // lags past the pump support vanish
        let far = FrequencyGrid::with_spacing(-20.0, 0.05, 1001).unwrap();
        let nf = pair_occupation(&p, 0.7, &far).unwrap();
        assert_eq!(nf[(0, 1000)], C64::new(0.0, 0.0));
        // a narrow partner grid misses pairs
        let narrow = FrequencyGrid::with_spacing(20.0, 0.05, 5).unwrap();
        let jn = fwm_joint_amplitude(&p, 0.7, &s, &narrow).unwrap();
        let seen: f64 = jn.row(10).iter().map(|z| z.norm_sqr()).sum();
        assert!(seen < 0.5 * direct[(10, 10)].re);
    }

    #[test]
    fn zero_gain_zero_amplitude() {
        let shape = PumpShape::Gaussian { fwhm: 1.0 };
        let pg = FrequencyGrid::with_spacing(0.0, 0.05, 201).unwrap();
        let p = pump_spectrum(&shape, 1.0, &pg).unwrap();
        let s = FrequencyGrid::with_spacing(-20.0, 0.05, 41).unwrap();
        let a = FrequencyGrid::with_spacing(20.0, 0.05, 41).unwrap();
        let j = fwm_joint_amplitude(&p, 0.0, &s, &a).unwrap();
        assert!(j.iter().all(|z| z.norm() == 0.0));
    }
}

use super::pump::PumpPulse;
use super::SourceParams;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::units::{thz_to_rad, HBAR, K_B};
use crate::{CMat, C64};
use nalgebra::DMatrix;
use std::path::Path;

const BUNDLED: &str = include_str!("../../data/raman_silica.txt");

/// Occupation returned at zero detuning, where the Bose factor diverges.
pub const OCCUPATION_CAP: f64 = 1e12;

/// Raman gain coefficient `g(|ν|)` in 1/(W·m), tabulated against detuning
/// from the pump.
///
/// File format: rows `detuning_THz gain_value`, `#` comments. Linear
/// interpolation inside the table, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct RamanGain {
    /// Detunings (rad/s), ascending, non-negative.
    pub detuning: Vec<f64>,
    pub gain: Vec<f64>,
}

impl RamanGain {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |reason: String| Error::Parse { path: origin.to_string(), line: i + 1, reason };
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(perr(format!("expected 2 columns, found {}", cols.len())));
            }
            let f: f64 = cols[0].parse().map_err(|_| perr(format!("bad detuning `{}`", cols[0])))?;
            let g: f64 = cols[1].parse().map_err(|_| perr(format!("bad gain `{}`", cols[1])))?;
            if !(f >= 0.0) || !(g >= 0.0) || !g.is_finite() {
                return Err(perr("detuning and gain must be non-negative".into()));
            }
            rows.push((thz_to_rad(f), g));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.len() < 2 {
            return Err(Error::Parse { path: origin.into(), line: 0, reason: "need two or more rows".into() });
        }
        Ok(Self { detuning: rows.iter().map(|r| r.0).collect(), gain: rows.iter().map(|r| r.1).collect() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// The silica profile shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED, "raman_silica.txt").expect("bundled Raman table parses")
    }

    /// `g ≡ 0`.
    pub fn zero() -> Self {
        Self { detuning: vec![0.0, f64::MAX], gain: vec![0.0, 0.0] }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { detuning: self.detuning.clone(), gain: self.gain.iter().map(|g| g * factor).collect() }
    }

    pub fn max_detuning(&self) -> f64 {
        *self.detuning.last().unwrap()
    }

    pub fn covers(&self, nu: f64) -> bool {
        nu.abs() <= self.max_detuning()
    }

    pub fn is_zero(&self) -> bool {
        self.gain.iter().all(|&g| g == 0.0)
    }

    /// `g(|ν|)`; zero outside the table.
    pub fn at(&self, nu: f64) -> f64 {
        let x = nu.abs();
        let d = &self.detuning;
        if x < d[0] || x > d[d.len() - 1] {
            return 0.0;
        }
        let k = d.partition_point(|&v| v <= x).clamp(1, d.len() - 1);
        let s = (x - d[k - 1]) / (d[k] - d[k - 1]);
        self.gain[k - 1] + s * (self.gain[k] - self.gain[k - 1])
    }
}

/// Phonon-bath occupation `1/(e^{ħ|ν|/k_BT} − 1) + θ(−ν)` for signed
/// detuning `ν = ω − ω_pump`: Stokes (ν < 0) carries the extra
/// spontaneous term. Non-positive temperatures act as the 0⁺ limit.
pub fn thermal_occupation(nu: f64, temperature: f64) -> f64 {
    if nu == 0.0 {
        log::warn!("thermal occupation at zero detuning capped at {OCCUPATION_CAP:e}");
        return OCCUPATION_CAP;
    }
    let x = if temperature > 0.0 { HBAR * nu.abs() / (K_B * temperature) } else { f64::INFINITY };
    let bose = 1.0 / x.exp_m1();
    let spont = if nu <= 0.0 { 1.0 } else { 0.0 };
    (bose + spont).min(OCCUPATION_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    /// Red of the pump (signal).
    Stokes,
    /// Blue of the pump (idler).
    AntiStokes,
}

/// Normal moments `⟨aₘ†aₙ⟩` of Raman-scattered light on `grid`:
///
/// `N[m,n] = (δω/2π)·L·Σ_ν 2π g(ν) n_T(ν) conj(A_p(ωₘ − ν)) A_p(ωₙ − ν) δν`,
///
/// evaluated as `CᴴC` with one row of `C` per phonon detuning.
pub fn raman_moments(pump: &PumpPulse, params: &SourceParams, grid: &FrequencyGrid, band: Band) -> Result<CMat> {
    grid.check_same_spacing(&pump.grid, "Raman band vs pump")?;
    let below = grid.center < pump.grid.center;
    if below != (band == Band::Stokes) {
        return Err(Error::GridMismatch(format!("{band:?} grid on the wrong side of the pump")));
    }
    let n = grid.n_points;
    let np = pump.grid.n_points;
    if params.raman.is_zero() {
        return Ok(CMat::zeros(n, n));
    }
    let (edge_lo, edge_hi) = (grid.lo() - pump.grid.center, grid.hi() - pump.grid.center);
    if !params.raman.covers(edge_lo) || !params.raman.covers(edge_hi) {
        return Err(Error::Coverage {
            have_lo: 0.0,
            have_hi: params.raman.max_detuning(),
            need_lo: edge_lo.abs().min(edge_hi.abs()),
            need_hi: edge_lo.abs().max(edge_hi.abs()),
        });
    }
    let d = grid.spacing();
    // ν for row j = m − k (signal index m, pump index k)
    let nu0 = grid.lo() - pump.grid.lo();
    let rows: Vec<(i64, f64)> = (-(np as i64 - 1)..n as i64)
        .filter_map(|j| {
            let nu = nu0 + j as f64 * d;
            if !params.raman.covers(nu) {
                return None;
            }
            let w = params.length * params.raman.at(nu) * thermal_occupation(nu, params.temperature) * d * d;
            (w > 0.0).then_some((j, w.sqrt()))
        })
        .collect();
    let uncovered = (-(np as i64 - 1)..n as i64).filter(|&j| !params.raman.covers(nu0 + j as f64 * d)).count();
    if uncovered > 0 {
        log::warn!("{uncovered} phonon detunings beyond the Raman table treated as zero gain");
    }
    let real_pump = pump.amplitude.iter().all(|a| a.im == 0.0);
    let fill = |part: &dyn Fn(C64) -> f64| {
        let mut c = DMatrix::<f64>::zeros(rows.len(), n);
        for (r, &(j, s)) in rows.iter().enumerate() {
            let m_lo = j.max(0) as usize;
            let m_hi = ((j + np as i64).min(n as i64)) as usize;
            for m in m_lo..m_hi {
                c[(r, m)] = s * part(pump.amplitude[(m as i64 - j) as usize]);
            }
        }
        c
    };
    let mut out = if real_pump {
        linalg::from_real(&linalg::gram_real(&fill(&|a| a.re)))
    } else {
        linalg::gram(&linalg::from_parts(&fill(&|a| a.re), &fill(&|a| a.im)))
    };
    linalg::hermitize(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupation_limits() {
        assert!(thermal_occupation(1e13, 1e-6) < 1e-300);
        assert!((thermal_occupation(-1e13, 1e-6) - 1.0).abs() < 1e-15);
        assert_eq!(thermal_occupation(0.0, 77.0), OCCUPATION_CAP);
    }

    #[test]
    fn occupation_1thz_77k() {
        // independent evaluation of the Bose factor with CODATA constants
        let h = 6.626_070_15e-34;
        let x: f64 = h * 1e12 / (1.380_649e-23 * 77.0);
        let want = 1.0 / (x.exp() - 1.0);
        let got = thermal_occupation(thz_to_rad(1.0), 77.0);
        assert!((got / want - 1.0).abs() < 1e-9);
        assert!((got - 1.156).abs() < 1e-3);
        assert!((thermal_occupation(-thz_to_rad(1.0), 77.0) - got - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bundled_table() {
        let g = RamanGain::bundled();
        assert!((g.at(thz_to_rad(13.2)) - 1.0e-3).abs() < 1e-15);
        assert!((g.at(thz_to_rad(1.2)) - 8.4e-5).abs() < 1e-12);
        assert_eq!(g.at(thz_to_rad(1.2)), g.at(-thz_to_rad(1.2)));
        assert_eq!(g.at(thz_to_rad(41.0)), 0.0);
    }

    #[test]
    fn parse_rejects_negative_gain() {
        assert!(RamanGain::parse("0 0\n1 -1\n", "x").is_err());
        assert!(RamanGain::parse("0 0\n", "x").is_err());
    }
}

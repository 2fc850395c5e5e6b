use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::modes::sinc;
use crate::C64;
use std::f64::consts::{LN_2, PI};

/// Pump pulse shape. Spectra are centered on the pump grid center.
#[derive(Debug, Clone, PartialEq)]
pub enum PumpShape {
    /// Chirp-free rectangle of length `duration` (s), e.g. carved from a
    /// CW laser by an amplitude modulator.
    Rectangular { duration: f64 },
    /// Transform-limited Gaussian with power FWHM `fwhm` (rad/s).
    Gaussian { fwhm: f64 },
    /// Real spectral amplitude samples at offsets (rad/s) from the center,
    /// linearly interpolated and zero outside.
    Tabulated { offsets: Vec<f64>, amplitude: Vec<f64> },
}

impl PumpShape {
    /// Unnormalized spectral amplitude at offset `w`.
    fn raw(&self, w: f64) -> f64 {
        match self {
            PumpShape::Rectangular { duration } => duration * sinc(0.5 * w * duration),
            PumpShape::Gaussian { fwhm } => (-2.0 * LN_2 * (w / fwhm).powi(2)).exp(),
            PumpShape::Tabulated { offsets, amplitude } => {
                if w < offsets[0] || w > offsets[offsets.len() - 1] {
                    return 0.0;
                }
                let k = offsets.partition_point(|&x| x <= w).clamp(1, offsets.len() - 1);
                let s = (w - offsets[k - 1]) / (offsets[k] - offsets[k - 1]);
                amplitude[k - 1] + s * (amplitude[k] - amplitude[k - 1])
            }
        }
    }

    /// `∫ |raw|² dω` over the whole line, when known in closed form.
    fn total_power(&self) -> Option<f64> {
        match self {
            PumpShape::Rectangular { duration } => Some(2.0 * PI * duration),
            PumpShape::Gaussian { fwhm } => Some(fwhm * (PI / (4.0 * LN_2)).sqrt()),
            PumpShape::Tabulated { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            PumpShape::Rectangular { duration: x } | PumpShape::Gaussian { fwhm: x } => {
                if !(*x > 0.0) || !x.is_finite() {
                    return Err(Error::param("pump shape", format!("width {x} is not positive")));
                }
            }
            PumpShape::Tabulated { offsets, amplitude } => {
                if offsets.len() < 2 || offsets.len() != amplitude.len() {
                    return Err(Error::param("pump shape", "need matching offset/amplitude samples (≥ 2)"));
                }
                if offsets.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::param("pump shape", "offsets must be strictly ascending"));
                }
            }
        }
        Ok(())
    }

    /// Smallest symmetric span holding `fraction` of the pulse energy.
    pub fn required_span(&self, fraction: f64) -> f64 {
        let (step, total) = match self {
            PumpShape::Rectangular { duration } => (0.01 / duration, 2.0 * PI * duration),
            PumpShape::Gaussian { fwhm } => (1e-4 * fwhm, fwhm * (PI / (4.0 * LN_2)).sqrt()),
            PumpShape::Tabulated { offsets, .. } => {
                return 2.0 * offsets[0].abs().max(offsets[offsets.len() - 1].abs());
            }
        };
        // Simpson panels outward from the center; the line is symmetric
        let target = 0.5 * fraction * total;
        let p = |w: f64| self.raw(w).powi(2);
        let (mut acc, mut w) = (0.0, 0.0);
        while acc < target {
            acc += step / 6.0 * (p(w) + 4.0 * p(w + 0.5 * step) + p(w + step));
            w += step;
        }
        2.0 * w
    }
}

/// Pump spectral amplitude `A_p(ωₘ)` in √(J·s), normalized so that
/// `2π Σ |A_p|² δω` is the pulse energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpPulse {
    pub grid: FrequencyGrid,
    pub amplitude: Vec<C64>,
    pub shape: PumpShape,
}

/// Least fraction of the pulse energy the pump grid must hold.
pub const PUMP_ENERGY_CAPTURE: f64 = 0.999;

pub fn pump_spectrum(shape: &PumpShape, energy: f64, grid: &FrequencyGrid) -> Result<PumpPulse> {
    shape.validate()?;
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::param("pump energy", format!("{energy} J is not positive")));
    }
    let d = grid.spacing();
    let raw: Vec<f64> = grid.offsets().iter().map(|&w| shape.raw(w)).collect();
    let held: f64 = raw.iter().map(|a| a * a).sum::<f64>() * d;
    if let Some(total) = shape.total_power() {
        let captured = held / total;
        if captured < PUMP_ENERGY_CAPTURE {
            return Err(Error::PumpGridTooNarrow {
                captured,
                required_span: shape.required_span(PUMP_ENERGY_CAPTURE),
            });
        }
    }
    if !(held > 0.0) {
        return Err(Error::param("pump shape", "zero spectrum on the grid"));
    }
    let scale = (energy / (2.0 * PI * held)).sqrt();
    Ok(PumpPulse {
        grid: *grid,
        amplitude: raw.iter().map(|&a| C64::new(a * scale, 0.0)).collect(),
        shape: shape.clone(),
    })
}

impl PumpPulse {
    /// `2π Σ |A_p|² δω`, joules.
    pub fn energy(&self) -> f64 {
        2.0 * PI * self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    /// Same shape at a different pulse energy.
    pub fn with_energy(&self, energy: f64) -> PumpPulse {
        let s = (energy / self.energy()).sqrt();
        PumpPulse { amplitude: self.amplitude.iter().map(|a| a * s).collect(), ..self.clone() }
    }

    /// Power FWHM of the sampled spectrum, rad/s (linear interpolation
    /// between samples at the half-maximum crossings).
    pub fn power_fwhm(&self) -> f64 {
        let p: Vec<f64> = self.amplitude.iter().map(|a| a.norm_sqr()).collect();
        fwhm(&p, self.grid.spacing())
    }

    /// Duration of the transform-limited pulse with this power FWHM,
    /// using the Gaussian time–bandwidth product 2·ln2/π ≈ 0.441.
    pub fn transform_limited_duration(&self) -> f64 {
        2.0 * LN_2 / PI / (self.power_fwhm() / (2.0 * PI))
    }
}

/// Full width at half maximum of a sampled single-peaked curve.
pub fn fwhm(p: &[f64], spacing: f64) -> f64 {
    let (imax, &peak) = match p.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) {
        Some(x) => x,
        None => return 0.0,
    };
    if !(peak > 0.0) {
        return 0.0;
    }
    let half = 0.5 * peak;
    let mut right = (p.len() - 1) as f64;
    for k in imax..p.len() - 1 {
        if p[k + 1] < half {
            right = k as f64 + (p[k] - half) / (p[k] - p[k + 1]);
            break;
        }
    }
    let mut left = 0.0;
    for k in (1..=imax).rev() {
        if p[k - 1] < half {
            left = k as f64 - (p[k] - half) / (p[k] - p[k - 1]);
            break;
        }
    }
    (right - left) * spacing
}

//! Spectral filter and temporal gate profiles.

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::units::wavelength_nm_to_rad;
use crate::C64;
use std::path::Path;

const LN2: f64 = std::f64::consts::LN_2;

/// Shape of a spectral filter, centered on the grid center unless
/// tabulated (tabulated spectra carry absolute wavelengths).
#[derive(Debug, Clone, PartialEq)]
pub enum FilterShape {
    /// Flat-top passband of full width `bandwidth` (rad/s).
    Rectangular { bandwidth: f64 },
    /// Gaussian with power FWHM `fwhm` (rad/s).
    Gaussian { fwhm: f64 },
    Tabulated(TabulatedSpectrum),
}

impl FilterShape {
    /// Full width of the passband used for grid sizing, rad/s.
    pub fn nominal_bandwidth(&self) -> f64 {
        match self {
            FilterShape::Rectangular { bandwidth } => *bandwidth,
            FilterShape::Gaussian { fwhm } => *fwhm,
            FilterShape::Tabulated(t) => t.fwhm_estimate(),
        }
    }
}

/// Measured filter transmission, one or more cascaded stages.
///
/// Text format: two columns `wavelength_nm transmission_dB`, `#` starts a
/// comment. A line `# stage` begins a new cascaded stage; `# absolute`
/// keeps the transmission as given instead of normalizing the peak to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpectrum {
    /// Per stage: (angular frequency, dB) sorted by frequency.
    pub stages: Vec<Vec<(f64, f64)>>,
    pub absolute: bool,
}

impl TabulatedSpectrum {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut stages: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        let mut absolute = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                match comment.trim() {
                    "stage" if !stages.last().unwrap().is_empty() => stages.push(Vec::new()),
                    "absolute" => absolute = true,
                    _ => {}
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let perr = |reason: String| Error::Parse { path: origin.to_string(), line: i + 1, reason };
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(perr(format!("expected 2 columns, found {}", cols.len())));
            }
            let nm: f64 = cols[0].parse().map_err(|_| perr(format!("bad wavelength `{}`", cols[0])))?;
            let db: f64 = cols[1].parse().map_err(|_| perr(format!("bad transmission `{}`", cols[1])))?;
            if !(nm > 0.0) || !db.is_finite() {
                return Err(perr("wavelength must be positive, transmission finite".into()));
            }
            stages.last_mut().unwrap().push((wavelength_nm_to_rad(nm), db));
        }
        stages.retain(|s| !s.is_empty());
        if stages.is_empty() {
            return Err(Error::Parse { path: origin.into(), line: 0, reason: "no data rows".into() });
        }
        for s in &mut stages {
            s.sort_by(|a, b| a.0.total_cmp(&b.0));
            if s.len() < 2 {
                return Err(Error::Parse { path: origin.into(), line: 0, reason: "stage needs two or more rows".into() });
            }
        }
        Ok(Self { stages, absolute })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Cascade of several spectra (pointwise product of amplitudes).
    pub fn cascade(parts: &[TabulatedSpectrum]) -> Self {
        Self {
            stages: parts.iter().flat_map(|p| p.stages.iter().cloned()).collect(),
            absolute: parts.iter().all(|p| p.absolute),
        }
    }

    /// Amplitude transmission at `w`; error outside the tabulated range.
    pub fn amplitude_at(&self, w: f64) -> Result<f64> {
        let mut amp = 1.0;
        for s in &self.stages {
            let (lo, hi) = (s[0].0, s[s.len() - 1].0);
            if w < lo || w > hi {
                return Err(Error::Coverage { have_lo: lo, have_hi: hi, need_lo: w, need_hi: w });
            }
            let k = s.partition_point(|p| p.0 <= w).clamp(1, s.len() - 1);
            let (w0, d0) = s[k - 1];
            let (w1, d1) = s[k];
            let db = if w1 > w0 { d0 + (d1 - d0) * (w - w0) / (w1 - w0) } else { d0 };
            amp *= 10f64.powf(db / 20.0);
        }
        Ok(amp)
    }

    fn coverage(&self) -> (f64, f64) {
        let lo = self.stages.iter().map(|s| s[0].0).fold(f64::MIN, f64::max);
        let hi = self.stages.iter().map(|s| s[s.len() - 1].0).fold(f64::MAX, f64::min);
        (lo, hi)
    }

    /// Power FWHM of the cascaded transmission, from the tabulated nodes.
    pub fn fwhm_estimate(&self) -> f64 {
        let (lo, hi) = self.coverage();
        let n = 4001;
        let ws: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        let p: Vec<f64> = ws.iter().map(|&w| self.amplitude_at(w).map(|a| a * a).unwrap_or(0.0)).collect();
        let peak = p.iter().cloned().fold(0.0, f64::max);
        let above: Vec<usize> = (0..n).filter(|&k| p[k] >= 0.5 * peak).collect();
        match (above.first(), above.last()) {
            (Some(&a), Some(&b)) => ws[b] - ws[a],
            _ => 0.0,
        }
    }

    /// Center of the half-maximum band.
    pub fn center_estimate(&self) -> f64 {
        let (lo, hi) = self.coverage();
        let n = 4001;
        let ws: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        let p: Vec<f64> = ws.iter().map(|&w| self.amplitude_at(w).map(|a| a * a).unwrap_or(0.0)).collect();
        let peak = p.iter().cloned().fold(0.0, f64::max);
        let above: Vec<usize> = (0..n).filter(|&k| p[k] >= 0.5 * peak).collect();
        match (above.first(), above.last()) {
            (Some(&a), Some(&b)) => 0.5 * (ws[a] + ws[b]),
            _ => 0.5 * (lo + hi),
        }
    }
}

/// Filter amplitude `h(ωₘ)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterProfile {
    pub grid: FrequencyGrid,
    pub amplitude: Vec<C64>,
    pub shape: FilterShape,
}

impl FilterProfile {
    /// `Σ |h|² δω`, the power-equivalent bandwidth.
    pub fn power_bandwidth(&self) -> f64 {
        self.amplitude.iter().map(|h| h.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn power(&self) -> Vec<f64> {
        self.amplitude.iter().map(|h| h.norm_sqr()).collect()
    }

    /// Pointwise product with another stage on the same grid.
    pub fn cascade(&self, other: &FilterProfile) -> Result<FilterProfile> {
        self.grid.check_same(&other.grid, "cascaded filters")?;
        Ok(FilterProfile {
            grid: self.grid,
            amplitude: self.amplitude.iter().zip(&other.amplitude).map(|(a, b)| a * b).collect(),
            shape: self.shape.clone(),
        })
    }
}

/// Sample a filter shape on `grid`.
///
/// Rectangular bands are sampled by cell overlap: `|h(ωₘ)|²` is the fraction
/// of the cell `[ωₘ − δω/2, ωₘ + δω/2]` inside the band, so `Σ|h|²δω`
/// equals the bandwidth exactly and edges landing on a sample get
/// `|h|² = 1/2`.
pub fn make_profile(shape: &FilterShape, grid: &FrequencyGrid) -> Result<FilterProfile> {
    let d = grid.spacing();
    let amplitude: Vec<C64> = match shape {
        FilterShape::Rectangular { bandwidth } => {
            if !(*bandwidth > 0.0) {
                return Err(Error::param("bandwidth", format!("{bandwidth} is not positive")));
            }
            let half = 0.5 * bandwidth;
            grid.offsets()
                .iter()
                .map(|&w| {
                    let lo = (w - 0.5 * d).clamp(-half, half);
                    let hi = (w + 0.5 * d).clamp(-half, half);
                    C64::new(((hi - lo) / d).clamp(0.0, 1.0).sqrt(), 0.0)
                })
                .collect()
        }
        FilterShape::Gaussian { fwhm } => {
            if !(*fwhm > 0.0) {
                return Err(Error::param("fwhm", format!("{fwhm} is not positive")));
            }
            grid.offsets()
                .iter()
                .map(|&w| C64::new((-2.0 * LN2 * (w / fwhm).powi(2)).exp(), 0.0))
                .collect()
        }
        FilterShape::Tabulated(t) => {
            let (lo, hi) = t.coverage();
            if grid.lo() < lo || grid.hi() > hi {
                return Err(Error::Coverage { have_lo: lo, have_hi: hi, need_lo: grid.lo(), need_hi: grid.hi() });
            }
            let raw = grid.points().iter().map(|&w| t.amplitude_at(w)).collect::<Result<Vec<f64>>>()?;
            let peak = raw.iter().cloned().fold(0.0, f64::max);
            if t.absolute {
                if peak > 1.0 + 1e-12 {
                    return Err(Error::param("spectrum", format!("absolute transmission {peak:.4} exceeds 1")));
                }
                raw.iter().map(|&a| C64::new(a, 0.0)).collect()
            } else {
                if !(peak > 0.0) {
                    return Err(Error::param("spectrum", "zero transmission over the grid"));
                }
                raw.iter().map(|&a| C64::new(a / peak, 0.0)).collect()
            }
        }
    };
    // far tails would reach the eigensolver as subnormals
    let amplitude = amplitude
        .into_iter()
        .map(|a| if a.norm() < AMPLITUDE_FLOOR { C64::new(0.0, 0.0) } else { a })
        .collect();
    Ok(FilterProfile { grid: *grid, amplitude, shape: shape.clone() })
}

/// Filter amplitudes below this are stored as zero.
pub const AMPLITUDE_FLOOR: f64 = 1e-30;

/// Shape of the temporal gate `f(t)`, centered on t = 0.
#[derive(Debug, Clone, PartialEq)]
pub enum GateShape {
    /// `|f|² = 1` on a window of length `duration` (s).
    Rectangular { duration: f64 },
    /// Gaussian `|f|²` with FWHM `fwhm` (s).
    Gaussian { fwhm: f64 },
    /// Samples of `f(t)` at ascending times.
    Tabulated { times: Vec<f64>, amplitude: Vec<f64> },
}

const GATE_QUADRATURE: usize = 4096;

/// Temporal gate with its intensity Fourier transform
/// `F(Δ) = ∫dt |f(t)|² e^{iΔt}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateProfile {
    pub shape: GateShape,
    /// Trapezoid nodes (t, weight·|f|²) for tabulated gates.
    quadrature: Vec<(f64, f64)>,
}

impl GateProfile {
    pub fn new(shape: GateShape) -> Result<Self> {
        let mut quadrature = Vec::new();
        match &shape {
            GateShape::Rectangular { duration: t } | GateShape::Gaussian { fwhm: t } => {
                if !(*t > 0.0) || !t.is_finite() {
                    return Err(Error::param("gate duration", format!("{t} is not positive")));
                }
            }
            GateShape::Tabulated { times, amplitude } => {
                if times.len() != amplitude.len() || times.len() < 2 {
                    return Err(Error::param("gate", "need matching time/amplitude samples (≥ 2)"));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::param("gate", "times must be strictly ascending"));
                }
                if amplitude.iter().any(|a| a.abs() > 1.0 + 1e-12) {
                    return Err(Error::param("gate", "|f(t)| exceeds 1"));
                }
                let (t0, t1) = (times[0], times[times.len() - 1]);
                let h = (t1 - t0) / (GATE_QUADRATURE - 1) as f64;
                for k in 0..GATE_QUADRATURE {
                    let t = t0 + h * k as f64;
                    let j = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1);
                    let s = (t - times[j - 1]) / (times[j] - times[j - 1]);
                    let f = amplitude[j - 1] + s * (amplitude[j] - amplitude[j - 1]);
                    let w = if k == 0 || k == GATE_QUADRATURE - 1 { 0.5 * h } else { h };
                    quadrature.push((t, w * f * f));
                }
                if quadrature.iter().all(|q| q.1 == 0.0) {
                    return Err(Error::param("gate", "zero duration"));
                }
            }
        }
        Ok(Self { shape, quadrature })
    }

    pub fn rectangular(duration: f64) -> Result<Self> {
        Self::new(GateShape::Rectangular { duration })
    }

    /// `∫dt |f(t)|²`.
    pub fn energy(&self) -> f64 {
        self.intensity_transform(0.0).re
    }

    /// Nominal duration: window length, FWHM, or tabulated extent.
    pub fn duration(&self) -> f64 {
        match &self.shape {
            GateShape::Rectangular { duration } => *duration,
            GateShape::Gaussian { fwhm } => *fwhm,
            GateShape::Tabulated { times, .. } => times[times.len() - 1] - times[0],
        }
    }

    /// `F(Δ) = ∫dt |f(t)|² e^{iΔt}`.
    pub fn intensity_transform(&self, delta: f64) -> C64 {
        match &self.shape {
            GateShape::Rectangular { duration } => C64::new(duration * sinc(0.5 * delta * duration), 0.0),
            GateShape::Gaussian { fwhm } => {
                let sigma = fwhm / (2.0 * (2.0 * LN2).sqrt());
                let v = sigma * (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * (delta * sigma).powi(2)).exp();
                C64::new(v, 0.0)
            }
            GateShape::Tabulated { .. } => self
                .quadrature
                .iter()
                .map(|&(t, w)| C64::from_polar(w, delta * t))
                .sum(),
        }
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

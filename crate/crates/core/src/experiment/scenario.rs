use super::config::{parse_config, FilterConfig, FilterKind, PumpKind, ScenarioConfig};
use crate::detection::dark_mean;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::modes::{build_kernel, make_profile, schmidt_decompose, FilterProfile, FilterShape, GateProfile, ModeBasis, TabulatedSpectrum};
use crate::network::{hom_dip_width_estimate, Detector, DetectorModel};
use crate::source::{calibrate_gain, pump_spectrum, Calibration, PumpPulse, PumpShape, RamanGain, SourceParams, PUMP_ENERGY_CAPTURE};
use crate::units::{ghz_to_rad, nm_width_to_rad, ps_to_s, thz_to_rad, wavelength_nm_to_rad};

/// A fully materialized experiment: calibrated pump, source parameters,
/// detector mode bases and the delays to scan.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub label: String,
    pub config: ScenarioConfig,
    pub params: SourceParams,
    pub pump: PumpPulse,
    pub calibration: Calibration,
    pub signal_filter: FilterProfile,
    pub idler_filter: FilterProfile,
    pub gate: GateProfile,
    /// Mode bases of detectors A, B (signal) and C, D (idler).
    pub bases: [ModeBasis; 4],
    pub detectors: [DetectorModel; 4],
    /// Total pump pulses of the run.
    pub pulses: f64,
    /// Delays, s, ascending.
    pub taus: Vec<f64>,
    /// Expected dip width, s.
    pub dip_width: f64,
}

impl Scenario {
    pub fn signal_grid(&self) -> FrequencyGrid {
        self.signal_filter.grid
    }

    pub fn idler_grid(&self) -> FrequencyGrid {
        self.idler_filter.grid
    }
}

/// Parse a configuration document and build the scenario.
pub fn load_scenario(config_text: &str) -> Result<Scenario> {
    build_scenario(&parse_config(config_text, "config", &[])?)
}

fn positive(name: &'static str, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::param(name, format!("{x} is not positive")));
    }
    Ok(x)
}

fn fraction(name: &'static str, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::param(name, format!("{x} outside [0, 1]")));
    }
    Ok(x)
}

fn filter_shape(f: &FilterConfig, center_nm: f64, cfg: &ScenarioConfig) -> Result<FilterShape> {
    Ok(match f.shape {
        FilterKind::Rectangular => {
            let b = match (f.bandwidth_ghz, f.bandwidth_nm) {
                (Some(g), _) => ghz_to_rad(positive("filter bandwidth_ghz", g)?),
                (None, Some(nm)) => nm_width_to_rad(positive("filter bandwidth_nm", nm)?, center_nm),
                (None, None) => return Err(Error::Config("rectangular filter without a bandwidth".into())),
            };
            FilterShape::Rectangular { bandwidth: b }
        }
        FilterKind::Gaussian => {
            let w = f.fwhm_ghz.ok_or_else(|| Error::Config("Gaussian filter without fwhm_ghz".into()))?;
            FilterShape::Gaussian { fwhm: ghz_to_rad(positive("filter fwhm_ghz", w)?) }
        }
        FilterKind::Tabulated => {
            let files = f.files.as_deref().unwrap_or_default();
            if files.is_empty() {
                return Err(Error::Config("tabulated filter lists no files".into()));
            }
            let parts = files
                .iter()
                .map(|p| TabulatedSpectrum::load(&cfg.resolve_path(p)))
                .collect::<Result<Vec<_>>>()?;
            FilterShape::Tabulated(TabulatedSpectrum::cascade(&parts))
        }
    })
}

/// Symmetric delay grid of `points` samples over `±half_range`.
pub fn delay_grid(points: usize, half_range: f64) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|k| -half_range + 2.0 * half_range * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn build_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    let g = &cfg.grid;
    if g.points < 16 {
        return Err(Error::param("grid.points", format!("{} is too few (≥ 16)", g.points)));
    }
    if !(g.span_per_bandwidth >= 1.0) {
        return Err(Error::param("grid.span_per_bandwidth", "must be at least 1"));
    }
    if !(PUMP_ENERGY_CAPTURE..1.0).contains(&g.pump_energy_fraction) {
        return Err(Error::param(
            "grid.pump_energy_fraction",
            format!("{} outside [{PUMP_ENERGY_CAPTURE}, 1)", g.pump_energy_fraction),
        ));
    }
    let d = &cfg.detection;
    fraction("detection.signal_transmission", d.signal_transmission)?;
    fraction("detection.idler_transmission", d.idler_transmission)?;
    fraction("detection.quantum_efficiency", d.quantum_efficiency)?;
    if !(d.retention_cutoff > 0.0 && d.retention_cutoff < 1.0) {
        return Err(Error::param("detection.retention_cutoff", "must lie in (0, 1)"));
    }
    positive("scan.pulses", cfg.scan.pulses)?;
    if !(cfg.source.raman_scale >= 0.0) {
        return Err(Error::param("source.raman_scale", "must be non-negative"));
    }

    let center_nm = positive("pump.center_nm", cfg.pump.center_nm)?;
    let wp = wavelength_nm_to_rad(center_nm);
    let detuning = thz_to_rad(positive("source.detuning_thz", cfg.source.detuning_thz)?);
    if detuning >= wp {
        return Err(Error::param("source.detuning_thz", "exceeds the pump frequency"));
    }
    let raman = match cfg.source.raman_file.as_str() {
        "bundled" => RamanGain::bundled(),
        path => RamanGain::load(&cfg.resolve_path(path))?,
    }
    .scaled(cfg.source.raman_scale);
    let params = SourceParams::symmetric(
        cfg.source.gamma_per_w_m,
        cfg.source.length_m,
        cfg.source.temperature_k,
        raman,
        wp,
        detuning,
    );
    params.validate()?;

    let fs = filter_shape(&cfg.filters.signal, center_nm, cfg)?;
    let fi = filter_shape(&cfg.filters.idler, center_nm, cfg)?;
    let band = fs.nominal_bandwidth().max(fi.nominal_bandwidth());
    positive("filter bandwidth", band)?;
    let spacing = g.span_per_bandwidth * band / (g.points - 1) as f64;
    let signal_grid = FrequencyGrid::with_spacing(params.signal_center, spacing, g.points)?;
    let idler_grid = FrequencyGrid::with_spacing(params.idler_center, spacing, g.points)?;
    let signal_filter = make_profile(&fs, &signal_grid)?;
    let idler_filter = make_profile(&fi, &idler_grid)?;

    let pump_shape = match cfg.pump.shape {
        PumpKind::Rectangular => PumpShape::Rectangular {
            duration: ps_to_s(positive("pump.duration_ps", cfg.pump.duration_ps.unwrap_or(f64::NAN))?),
        },
        PumpKind::Gaussian => PumpShape::Gaussian {
            fwhm: ghz_to_rad(positive("pump.fwhm_ghz", cfg.pump.fwhm_ghz.unwrap_or(f64::NAN))?),
        },
    };
    let half = (0.5 * pump_shape.required_span(g.pump_energy_fraction) / spacing).ceil() as usize;
    let pump_grid = FrequencyGrid::with_spacing(wp, spacing, 2 * half + 1)?;
    let unit_pump = pump_spectrum(&pump_shape, 1.0, &pump_grid)?;
    let calibration = calibrate_gain(cfg.pump.pair_probability, &unit_pump, &params, &signal_filter)?;
    let pump = unit_pump.with_energy(calibration.pump_energy);
    log::info!(
        "{}: {} grid points, pump grid {} points, pulse energy {:.4e} J",
        cfg.label,
        g.points,
        pump_grid.n_points,
        calibration.pump_energy
    );

    let gate_len = ps_to_s(positive("detection.gate_ps", d.gate_ps)?);
    if gate_len >= signal_grid.time_window() {
        return Err(Error::param(
            "detection.gate_ps",
            format!(
                "{} ps is not shorter than the grid time window {:.1} ps; raise grid.points",
                d.gate_ps,
                signal_grid.time_window() * 1e12
            ),
        ));
    }
    let gate = GateProfile::rectangular(gate_len)?;
    let bs = schmidt_decompose(&build_kernel(&signal_filter, &gate))?.truncate(d.retention_cutoff);
    let bi = schmidt_decompose(&build_kernel(&idler_filter, &gate))?.truncate(d.retention_cutoff);
    log::info!("{}: {} signal and {} idler modes retained", cfg.label, bs.len(), bi.len());
    let qe = if d.transmission_includes_qe { 1.0 } else { d.quantum_efficiency };
    let mu = dark_mean(d.dark_probability)?;
    let bases = [bs.clone(), bs, bi.clone(), bi];
    let eff = [d.signal_transmission * qe, d.signal_transmission * qe, d.idler_transmission * qe, d.idler_transmission * qe];
    let mut detectors = Vec::with_capacity(4);
    for det in Detector::ALL {
        detectors.push(DetectorModel::new(det, eff[det.index()], &bases[det.index()], mu)?);
    }
    let detectors: [DetectorModel; 4] = detectors.try_into().expect("four detectors");

    let dip_width = hom_dip_width_estimate(&bases[0], &pump)?;
    let taus = match &cfg.scan.tau_ps {
        Some(list) => {
            if list.is_empty() {
                return Err(Error::param("scan.tau_ps", "empty delay list"));
            }
            if list.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::param("scan.tau_ps", "delays must be strictly ascending"));
            }
            list.iter().map(|&t| ps_to_s(t)).collect()
        }
        None => {
            if cfg.scan.points == 0 {
                return Err(Error::param("scan.points", "must be at least 1"));
            }
            delay_grid(cfg.scan.points, positive("scan.range_widths", cfg.scan.range_widths)? * dip_width)
        }
    };

    Ok(Scenario {
        label: cfg.label.clone(),
        config: cfg.clone(),
        params,
        pump,
        calibration,
        signal_filter,
        idler_filter,
        gate,
        bases,
        detectors,
        pulses: cfg.scan.pulses,
        taus,
        dip_width,
    })
}

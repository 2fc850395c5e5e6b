//! TOML scenario configuration with built-in presets and `key=value`
//! overrides. Every physical key carries its unit in the name.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

const MULTIMODE: &str = include_str!("../../data/presets/multimode.toml");
const SINGLE_MODE: &str = include_str!("../../data/presets/single_mode.toml");

pub const PRESETS: [&str; 2] = ["multimode", "single_mode"];

/// Text of a built-in preset.
pub fn preset_text(name: &str) -> Result<&'static str> {
    match name {
        "multimode" => Ok(MULTIMODE),
        "single_mode" => Ok(SINGLE_MODE),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpKind {
    Rectangular,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    Rectangular,
    Gaussian,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub points: usize,
    pub span_per_bandwidth: f64,
    pub pump_energy_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpConfig {
    pub shape: PumpKind,
    /// Rectangular pulses only.
    pub duration_ps: Option<f64>,
    /// Gaussian pulses only: power FWHM of the spectrum.
    pub fwhm_ghz: Option<f64>,
    pub center_nm: f64,
    pub pair_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub gamma_per_w_m: f64,
    pub length_m: f64,
    pub temperature_k: f64,
    pub detuning_thz: f64,
    /// `"bundled"` or a path to a gain table.
    pub raman_file: String,
    pub raman_scale: f64,
}

/// One arm's filter. Exactly one width key applies to the analytic shapes;
/// tabulated filters list spectrum files cascaded in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub shape: FilterKind,
    pub bandwidth_ghz: Option<f64>,
    pub bandwidth_nm: Option<f64>,
    pub fwhm_ghz: Option<f64>,
    pub files: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiltersConfig {
    pub signal: FilterConfig,
    pub idler: FilterConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub gate_ps: f64,
    pub retention_cutoff: f64,
    pub dark_probability: f64,
    pub quantum_efficiency: f64,
    /// When true the arm transmissions already contain the detector
    /// efficiency and `quantum_efficiency` is informational.
    pub transmission_includes_qe: bool,
    pub signal_transmission: f64,
    pub idler_transmission: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub pulses: f64,
    /// Explicit delays; when absent a symmetric grid is generated.
    pub tau_ps: Option<Vec<f64>>,
    pub points: usize,
    /// Half-range in units of the estimated dip width.
    pub range_widths: f64,
}

/// Fully specified scenario parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub label: String,
    pub grid: GridConfig,
    pub pump: PumpConfig,
    pub source: SourceConfig,
    pub filters: FiltersConfig,
    pub detection: DetectionConfig,
    pub scan: ScanConfig,
    /// Directory that relative file paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

// Lenient mirror of the schema used to report every missing key at once.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    label: Option<String>,
    preset: Option<String>,
    grid: Option<RawGrid>,
    pump: Option<RawPump>,
    source: Option<RawSource>,
    filters: Option<RawFilters>,
    detection: Option<RawDetection>,
    scan: Option<RawScan>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    points: Option<usize>,
    span_per_bandwidth: Option<f64>,
    pump_energy_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPump {
    shape: Option<PumpKind>,
    duration_ps: Option<f64>,
    fwhm_ghz: Option<f64>,
    center_nm: Option<f64>,
    pair_probability: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    gamma_per_w_m: Option<f64>,
    length_m: Option<f64>,
    temperature_k: Option<f64>,
    detuning_thz: Option<f64>,
    raman_file: Option<String>,
    raman_scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilters {
    signal: Option<RawFilter>,
    idler: Option<RawFilter>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilter {
    shape: Option<FilterKind>,
    bandwidth_ghz: Option<f64>,
    bandwidth_nm: Option<f64>,
    fwhm_ghz: Option<f64>,
    files: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetection {
    gate_ps: Option<f64>,
    retention_cutoff: Option<f64>,
    dark_probability: Option<f64>,
    quantum_efficiency: Option<f64>,
    transmission_includes_qe: Option<bool>,
    signal_transmission: Option<f64>,
    idler_transmission: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    pulses: Option<f64>,
    tau_ps: Option<Vec<f64>>,
    points: Option<usize>,
    range_widths: Option<f64>,
}

struct Missing(Vec<String>);

impl Missing {
    fn take<T>(&mut self, v: Option<T>, key: &str) -> Option<T> {
        if v.is_none() {
            self.0.push(key.to_string());
        }
        v
    }
}

fn parse_table(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::Config(format!("{origin}: {}", e.to_string().trim())))
}

/// Recursively overlay `top` onto `base`.
/// Width keys that belong to one pump or filter shape.
const SHAPE_KEYS: [&str; 5] = ["duration_ps", "fwhm_ghz", "bandwidth_ghz", "bandwidth_nm", "files"];

// A section whose `shape` changes drops the width keys of the old shape.
fn merge(base: &mut toml::Table, top: toml::Table) {
    if let (Some(old), Some(new)) = (base.get("shape"), top.get("shape")) {
        if old != new {
            base.retain(|k, _| !SHAPE_KEYS.iter().any(|s| *s == k));
        }
    }
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Set `a.b.c = value` from an override string `a.b.c=value`. The value is
/// read as a TOML literal, falling back to a bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{spec}` has an empty key")));
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(Error::Config(format!("override `{key}`: `{p}` is not a section"))),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Merge preset (if named), file contents and overrides, in that order.
pub fn resolve_table(text: &str, origin: &str, overrides: &[String]) -> Result<toml::Table> {
    let user = parse_table(text, origin)?;
    let mut table = match user.get("preset") {
        Some(toml::Value::String(name)) => parse_table(preset_text(name)?, name)?,
        Some(_) => return Err(Error::Config("`preset` must be a string".into())),
        None => toml::Table::new(),
    };
    merge(&mut table, user);
    let mut layer = toml::Table::new();
    for o in overrides {
        apply_override(&mut layer, o)?;
    }
    merge(&mut table, layer);
    if let Some(toml::Value::String(name)) = table.get("preset") {
        preset_text(name)?;
    }
    Ok(table)
}

/// Parse a configuration document (with optional preset and overrides).
pub fn parse_config(text: &str, origin: &str, overrides: &[String]) -> Result<ScenarioConfig> {
    let table = resolve_table(text, origin, overrides)?;
    let raw: RawConfig = RawConfig::deserialize(toml::Value::Table(table))
        .map_err(|e| Error::Config(format!("{origin}: {}", e.to_string().trim())))?;
    raw.resolve()
}

/// Read a configuration file; relative paths inside resolve against its
/// directory.
pub fn read_config(path: &Path, overrides: &[String]) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config(&text, &path.display().to_string(), overrides)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    Ok(cfg)
}

/// A built-in preset with overrides.
pub fn preset_config(name: &str, overrides: &[String]) -> Result<ScenarioConfig> {
    parse_config(&format!("preset = \"{name}\""), name, overrides)
}

impl RawConfig {
    fn resolve(self) -> Result<ScenarioConfig> {
        let mut miss = Missing(Vec::new());
        let label = self.label.or(self.preset.clone()).unwrap_or_else(|| "custom".into());
        let g = self.grid.unwrap_or_default();
        let p = self.pump.unwrap_or_default();
        let s = self.source.unwrap_or_default();
        let f = self.filters.unwrap_or_default();
        let d = self.detection.unwrap_or_default();
        let sc = self.scan.unwrap_or_default();
        let grid = (
            miss.take(g.points, "grid.points"),
            miss.take(g.span_per_bandwidth, "grid.span_per_bandwidth"),
            miss.take(g.pump_energy_fraction, "grid.pump_energy_fraction"),
        );
        let shape = miss.take(p.shape, "pump.shape");
        match shape {
            Some(PumpKind::Rectangular) => {
                miss.take(p.duration_ps, "pump.duration_ps");
            }
            Some(PumpKind::Gaussian) => {
                miss.take(p.fwhm_ghz, "pump.fwhm_ghz");
            }
            None => {}
        }
        let pump = (
            miss.take(p.center_nm, "pump.center_nm"),
            miss.take(p.pair_probability, "pump.pair_probability"),
        );
        let source = (
            miss.take(s.gamma_per_w_m, "source.gamma_per_w_m"),
            miss.take(s.length_m, "source.length_m"),
            miss.take(s.temperature_k, "source.temperature_k"),
            miss.take(s.detuning_thz, "source.detuning_thz"),
            miss.take(s.raman_file, "source.raman_file"),
            miss.take(s.raman_scale, "source.raman_scale"),
        );
        let mut filter = |raw: Option<RawFilter>, arm: &str| {
            let r = raw.unwrap_or_default();
            let kind = miss.take(r.shape, &format!("filters.{arm}.shape"));
            let widths = [r.bandwidth_ghz.is_some(), r.bandwidth_nm.is_some(), r.fwhm_ghz.is_some()];
            match kind {
                Some(FilterKind::Rectangular) if !widths[0] && !widths[1] => {
                    miss.0.push(format!("filters.{arm}.bandwidth_ghz"));
                }
                Some(FilterKind::Gaussian) if !widths[2] => miss.0.push(format!("filters.{arm}.fwhm_ghz")),
                Some(FilterKind::Tabulated) if r.files.is_none() => miss.0.push(format!("filters.{arm}.files")),
                _ => {}
            }
            kind.map(|shape| FilterConfig {
                shape,
                bandwidth_ghz: r.bandwidth_ghz,
                bandwidth_nm: r.bandwidth_nm,
                fwhm_ghz: r.fwhm_ghz,
                files: r.files,
            })
        };
        let signal = filter(f.signal, "signal");
        let idler = filter(f.idler, "idler");
        let det = (
            miss.take(d.gate_ps, "detection.gate_ps"),
            miss.take(d.retention_cutoff, "detection.retention_cutoff"),
            miss.take(d.dark_probability, "detection.dark_probability"),
            miss.take(d.quantum_efficiency, "detection.quantum_efficiency"),
            miss.take(d.transmission_includes_qe, "detection.transmission_includes_qe"),
            miss.take(d.signal_transmission, "detection.signal_transmission"),
            miss.take(d.idler_transmission, "detection.idler_transmission"),
        );
        let pulses = miss.take(sc.pulses, "scan.pulses");
        if !miss.0.is_empty() {
            return Err(Error::MissingFields(miss.0));
        }
        let cfg = ScenarioConfig {
            label,
            grid: GridConfig {
                points: grid.0.unwrap(),
                span_per_bandwidth: grid.1.unwrap(),
                pump_energy_fraction: grid.2.unwrap(),
            },
            pump: PumpConfig {
                shape: shape.unwrap(),
                duration_ps: p.duration_ps,
                fwhm_ghz: p.fwhm_ghz,
                center_nm: pump.0.unwrap(),
                pair_probability: pump.1.unwrap(),
            },
            source: SourceConfig {
                gamma_per_w_m: source.0.unwrap(),
                length_m: source.1.unwrap(),
                temperature_k: source.2.unwrap(),
                detuning_thz: source.3.unwrap(),
                raman_file: source.4.unwrap(),
                raman_scale: source.5.unwrap(),
            },
            filters: FiltersConfig { signal: signal.unwrap(), idler: idler.unwrap() },
            detection: DetectionConfig {
                gate_ps: det.0.unwrap(),
                retention_cutoff: det.1.unwrap(),
                dark_probability: det.2.unwrap(),
                quantum_efficiency: det.3.unwrap(),
                transmission_includes_qe: det.4.unwrap(),
                signal_transmission: det.5.unwrap(),
                idler_transmission: det.6.unwrap(),
            },
            scan: ScanConfig {
                pulses: pulses.unwrap(),
                tau_ps: sc.tau_ps,
                points: sc.points.unwrap_or(41),
                range_widths: sc.range_widths.unwrap_or(3.0),
            },
            base_dir: None,
        };
        cfg.check_units()?;
        Ok(cfg)
    }
}

impl ScenarioConfig {
    /// Reject width keys that do not belong to the chosen shapes.
    fn check_units(&self) -> Result<()> {
        match self.pump.shape {
            PumpKind::Rectangular if self.pump.fwhm_ghz.is_some() => {
                return Err(Error::Config("pump.fwhm_ghz given for a rectangular pump (use duration_ps)".into()))
            }
            PumpKind::Gaussian if self.pump.duration_ps.is_some() => {
                return Err(Error::Config("pump.duration_ps given for a Gaussian pump (use fwhm_ghz)".into()))
            }
            _ => {}
        }
        for (arm, f) in [("signal", &self.filters.signal), ("idler", &self.filters.idler)] {
            let set: Vec<&str> = [
                ("bandwidth_ghz", f.bandwidth_ghz.is_some()),
                ("bandwidth_nm", f.bandwidth_nm.is_some()),
                ("fwhm_ghz", f.fwhm_ghz.is_some()),
                ("files", f.files.is_some()),
            ]
            .iter()
            .filter(|x| x.1)
            .map(|x| x.0)
            .collect();
            let allowed: &[&str] = match f.shape {
                FilterKind::Rectangular => &["bandwidth_ghz", "bandwidth_nm"],
                FilterKind::Gaussian => &["fwhm_ghz"],
                FilterKind::Tabulated => &["files"],
            };
            if set.len() != 1 || !allowed.contains(&set[0]) {
                return Err(Error::Config(format!(
                    "filters.{arm}: shape {:?} takes exactly one of {allowed:?}, found {set:?}",
                    f.shape
                )));
            }
        }
        Ok(())
    }

    /// Resolve a path from the configuration against its directory.
    pub fn resolve_path(&self, p: &str) -> PathBuf {
        let path = PathBuf::from(p);
        match (&self.base_dir, path.is_relative()) {
            (Some(dir), true) => dir.join(path),
            _ => path,
        }
    }

    /// Canonical TOML rendering.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

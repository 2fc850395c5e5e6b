//! Scenario assembly, delay scans, visibility fits and expected counts.

pub mod config;
mod counts;
mod fit;
mod scan;
mod scenario;

pub use config::{parse_config, preset_config, read_config, ScenarioConfig, PRESETS};
pub use counts::{expected_counts, Count, CountRow};
pub use fit::{fit_dip, fit_visibility, Observable, VisibilityFit, MIN_ROWS, MIN_SPAN_WIDTHS};
pub use scan::{run_delay_scan, scan_row, scenario_moments, DelayScan, ScanRow, CSV_HEADER};
pub use scenario::{build_scenario, delay_grid, load_scenario, Scenario};

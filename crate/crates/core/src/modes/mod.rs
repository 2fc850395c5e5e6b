//! Filtering theory: gate + filter kernel and its Schmidt modes.
//!
//! A gate `f(t)` followed by a filter `h(ω)` turns the photon-number
//! operator into `n̂ = Σⱼ χⱼ ĉⱼ†ĉⱼ`. For rectangular shapes the spectrum
//! `{χⱼ}` depends only on `c = BT/4` (prolate spheroidal eigenvalues).

mod basis;
mod kernel;
mod profile;

pub use basis::{schmidt_decompose, ModeBasis, EIGENVALUE_FLOOR, RETENTION_CUTOFF};
pub use kernel::{build_kernel, KernelMatrix};
pub use profile::{make_profile, sinc, FilterProfile, FilterShape, GateProfile, GateShape, TabulatedSpectrum};

use crate::error::Result;
use crate::grid::FrequencyGrid;

/// Default number of grid points for mode analysis.
pub const DEFAULT_POINTS: usize = 513;
/// Default grid span in units of the filter bandwidth.
pub const SPAN_PER_BANDWIDTH: f64 = 4.0;

/// `c = B·T/4`.
pub fn effective_c(bandwidth: f64, duration: f64) -> f64 {
    bandwidth * duration / 4.0
}

/// Filter bandwidth giving parameter `c` for gate duration `duration`.
pub fn bandwidth_for_c(c: f64, duration: f64) -> f64 {
    4.0 * c / duration
}

/// Schmidt eigenvalues of a rectangular filter behind a rectangular gate.
pub fn rect_rect_modes(bandwidth: f64, duration: f64, n_points: usize) -> Result<ModeBasis> {
    let grid = FrequencyGrid::new(0.0, SPAN_PER_BANDWIDTH * bandwidth, n_points)?;
    let filter = make_profile(&FilterShape::Rectangular { bandwidth }, &grid)?;
    schmidt_decompose(&build_kernel(&filter, &GateProfile::rectangular(duration)?))
}

/// One row of the eigenvalue-versus-c table.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub c: f64,
    pub chi: Vec<f64>,
}

/// Leading `n_modes` eigenvalues of the rectangle–rectangle kernel for each
/// `c`, with the gate held at unit duration. `c = 0` yields a zero row.
pub fn eigenvalue_curve(c_values: &[f64], n_modes: usize, n_points: usize) -> Result<Vec<CurveRow>> {
    c_values
        .iter()
        .map(|&c| {
            if c < 0.0 || !c.is_finite() {
                return Err(crate::Error::param("c", format!("{c} is not a valid time-bandwidth parameter")));
            }
            if c == 0.0 {
                return Ok(CurveRow { c, chi: vec![0.0; n_modes] });
            }
            let basis = rect_rect_modes(bandwidth_for_c(c, 1.0), 1.0, n_points)?;
            let mut chi: Vec<f64> = basis.eigenvalues.iter().take(n_modes).copied().collect();
            chi.resize(n_modes, 0.0);
            Ok(CurveRow { c, chi })
        })
        .collect()
}

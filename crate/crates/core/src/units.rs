//! Physical constants and unit conversions.

use std::f64::consts::PI;

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s (exact).
pub const C_LIGHT: f64 = 299_792_458.0;

pub fn ghz_to_rad(f_ghz: f64) -> f64 {
    2.0 * PI * f_ghz * 1e9
}

pub fn thz_to_rad(f_thz: f64) -> f64 {
    2.0 * PI * f_thz * 1e12
}

pub fn rad_to_ghz(w: f64) -> f64 {
    w / (2.0 * PI * 1e9)
}

pub fn ps_to_s(t_ps: f64) -> f64 {
    t_ps * 1e-12
}

pub fn s_to_ps(t: f64) -> f64 {
    t * 1e12
}

/// Angular frequency of light at vacuum wavelength `nm`.
pub fn wavelength_nm_to_rad(nm: f64) -> f64 {
    2.0 * PI * C_LIGHT / (nm * 1e-9)
}

/// Angular bandwidth corresponding to a wavelength width `width_nm` at
/// center wavelength `center_nm` (first order in width/center).
pub fn nm_width_to_rad(width_nm: f64, center_nm: f64) -> f64 {
    2.0 * PI * C_LIGHT * width_nm / (center_nm * center_nm) * 1e9
}

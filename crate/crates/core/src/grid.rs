//! Uniform angular-frequency grids.
//!
//! Quadrature convention used everywhere: `∫dω g(ω) ≈ Σₘ g(ωₘ)·δω`.
//! Field operators on a grid are the unit-commutator modes
//! `aₘ = a(ωₘ)·sqrt(δω/2π)`, so every moment matrix in the crate is
//! dimensionless.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    /// Absolute center, rad/s. Spectral shapes are placed relative to it.
    pub center: f64,
    /// Distance between first and last point, rad/s.
    pub span: f64,
    pub n_points: usize,
}

impl FrequencyGrid {
    pub fn new(center: f64, span: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::param("n_points", format!("{n_points} < 2")));
        }
        if !(span > 0.0) || !span.is_finite() {
            return Err(Error::param("span", format!("{span} is not positive")));
        }
        if !center.is_finite() {
            return Err(Error::param("center", "not finite"));
        }
        Ok(Self { center, span, n_points })
    }

    /// Grid with a prescribed spacing. `n_points` should be odd when the
    /// center itself must be a sample.
    pub fn with_spacing(center: f64, spacing: f64, n_points: usize) -> Result<Self> {
        Self::new(center, spacing * (n_points.max(2) - 1) as f64, n_points)
    }

    pub fn spacing(&self) -> f64 {
        self.span / (self.n_points - 1) as f64
    }

    /// Offset of point `m` from the center.
    pub fn offset(&self, m: usize) -> f64 {
        -0.5 * self.span + m as f64 * self.spacing()
    }

    pub fn point(&self, m: usize) -> f64 {
        self.center + self.offset(m)
    }

    pub fn offsets(&self) -> Vec<f64> {
        (0..self.n_points).map(|m| self.offset(m)).collect()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|m| self.point(m)).collect()
    }

    pub fn lo(&self) -> f64 {
        self.center - 0.5 * self.span
    }

    pub fn hi(&self) -> f64 {
        self.center + 0.5 * self.span
    }

    /// Length of the time window the grid represents without aliasing.
    pub fn time_window(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.spacing()
    }

    /// Quadrature weight converting `Σ |.|²` to the `2π`-normalized measure.
    pub fn measure(&self) -> f64 {
        self.spacing() / (2.0 * std::f64::consts::PI)
    }

    /// Require equal spacing (to relative 1e-9).
    pub fn check_same_spacing(&self, other: &Self, what: &str) -> Result<()> {
        let (a, b) = (self.spacing(), other.spacing());
        if ((a - b) / a).abs() > 1e-9 {
            return Err(Error::GridMismatch(format!(
                "{what}: spacing {a:.9e} vs {b:.9e} rad/s"
            )));
        }
        Ok(())
    }

    /// Require identical grids.
    pub fn check_same(&self, other: &Self, what: &str) -> Result<()> {
        self.check_same_spacing(other, what)?;
        let tol = 1e-6 * self.spacing();
        if self.n_points != other.n_points || (self.center - other.center).abs() > tol {
            return Err(Error::GridMismatch(format!(
                "{what}: {} points at {:.9e} vs {} points at {:.9e}",
                self.n_points, self.center, other.n_points, other.center
            )));
        }
        Ok(())
    }
}

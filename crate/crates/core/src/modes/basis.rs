use super::kernel::KernelMatrix;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::{CMat, C64};
use std::f64::consts::PI;

/// Eigenvalues are clamped to zero below this.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;
/// Default cutoff for modes handed to the detection model.
pub const RETENTION_CUTOFF: f64 = 1e-3;

/// Schmidt decomposition of a filtering kernel.
///
/// `eigenmodes` column j holds `φⱼ(ωₘ)`, normalized so that
/// `Σₘ |φⱼ(ωₘ)|² δω = 2π`, and
/// `κ(ωₘ, ωₙ) = Σⱼ χⱼ conj(φⱼ(ωₘ)) φⱼ(ωₙ)`.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    pub grid: FrequencyGrid,
    pub eigenvalues: Vec<f64>,
    pub eigenmodes: CMat,
}

impl ModeBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Number of modes with `χⱼ ≥ cutoff`.
    pub fn retained(&self, cutoff: f64) -> usize {
        self.eigenvalues.iter().take_while(|&&x| x >= cutoff).count()
    }

    /// Keep the modes with `χⱼ ≥ cutoff`.
    pub fn truncate(&self, cutoff: f64) -> ModeBasis {
        let k = self.retained(cutoff);
        ModeBasis {
            grid: self.grid,
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenmodes: self.eigenmodes.columns(0, k).into_owned(),
        }
    }

    /// Mode-operator coefficients: column j is `vⱼ = φⱼ·sqrt(δω/2π)`, so
    /// that `ĉⱼ = Σₘ vⱼ[m]·aₘ` on unit-commutator grid modes.
    pub fn operator_vectors(&self) -> CMat {
        &self.eigenmodes * C64::new(self.grid.measure().sqrt(), 0.0)
    }

    /// `max |Σₘ conj(φⱼ)φₖ δω/2π − δⱼₖ|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let v = self.operator_vectors();
        let g = v.adjoint() * &v;
        let mut worst = 0.0f64;
        for j in 0..g.nrows() {
            for k in 0..g.ncols() {
                let id = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((g[(j, k)] - id).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Eigen-decompose `K·δω/2π`.
///
/// Each mode's global phase is fixed by making it real and positive at its
/// largest-magnitude sample (first such sample on ties).
pub fn schmidt_decompose(kernel: &KernelMatrix) -> Result<ModeBasis> {
    let g = kernel.grid;
    let (mut vals, vecs) = linalg::hermitian_eigen(&kernel.scaled())?;
    if let Some(&top) = vals.first() {
        if top > 1.0 + 1e-6 {
            return Err(Error::EigenvalueAboveOne { value: top });
        }
    }
    for v in vals.iter_mut() {
        if *v < EIGENVALUE_FLOOR {
            *v = 0.0;
        }
    }
    let scale = (2.0 * PI / g.spacing()).sqrt();
    let n = g.n_points;
    let mut modes = CMat::zeros(n, vals.len());
    for j in 0..vals.len() {
        // K̃ = Σ χ uⱼuⱼᴴ and K̃[m,n] ∝ conj(φ(ωₘ))φ(ωₙ), hence φ ∝ conj(u)
        let col: Vec<C64> = vecs.column(j).iter().map(|u| u.conj() * scale).collect();
        let peak = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let at = col.iter().position(|z| z.norm() >= peak * (1.0 - 1e-9)).unwrap_or(0);
        let phase = if col[at].norm() > 0.0 { col[at].conj() / col[at].norm() } else { C64::new(1.0, 0.0) };
        for m in 0..n {
            modes[(m, j)] = col[m] * phase;
        }
    }
    Ok(ModeBasis { grid: g, eigenvalues: vals, eigenmodes: modes })
}

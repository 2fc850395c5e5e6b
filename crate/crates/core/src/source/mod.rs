//! Photon-pair source model: one fiber spool pumped by a pulse.
//!
//! Output fields are expanded to second order in the four-wave-mixing gain
//! over vacuum inputs, plus the Raman noise term contracted with a thermal
//! phonon bath. On unit-commutator grid modes the state of one spool is
//!
//! * `⟨a_s† a_s⟩ = conj(J)·Jᵀ + N_R,stokes`
//! * `⟨a_a† a_a⟩ = Jᴴ·J + N_R,antistokes`
//! * `⟨a_s a_a⟩ = J`
//!
//! with `J` the joint spectral amplitude. In the occupations the partner
//! index runs over every frequency the pump can reach, so photons whose
//! partner falls outside the other band's grid are kept; `J` itself is
//! only needed on the two grids. Moment matrices follow the
//! convention `N[i,j] = ⟨aᵢ†aⱼ⟩`, `M[i,j] = ⟨aᵢaⱼ⟩`.

mod fwm;
mod pump;
mod raman;

pub use fwm::{fwm_joint_amplitude, pair_occupation};
pub(crate) use fwm::autoconvolution;
pub use pump::{fwhm, pump_spectrum, PumpPulse, PumpShape, PUMP_ENERGY_CAPTURE};
pub use raman::{raman_moments, thermal_occupation, Band, RamanGain, OCCUPATION_CAP};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::modes::FilterProfile;
use crate::{CMat, C64};

/// Largest pair probability treated as perturbative.
pub const MAX_PAIR_PROBABILITY: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct SourceParams {
    /// Four-wave-mixing coefficient, 1/(W·m).
    pub gamma: f64,
    /// Effective fiber length, m.
    pub length: f64,
    /// Fiber temperature, K.
    pub temperature: f64,
    pub raman: RamanGain,
    /// Absolute angular frequencies of the pump, signal and idler bands.
    pub pump_center: f64,
    pub signal_center: f64,
    pub idler_center: f64,
}

impl SourceParams {
    /// Signal/idler placed symmetrically at `detuning` below/above the pump.
    pub fn symmetric(gamma: f64, length: f64, temperature: f64, raman: RamanGain, pump_center: f64, detuning: f64) -> Self {
        Self {
            gamma,
            length,
            temperature,
            raman,
            pump_center,
            signal_center: pump_center - detuning,
            idler_center: pump_center + detuning,
        }
    }

    pub fn gamma_l(&self) -> f64 {
        self.gamma * self.length
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::param("length", format!("{} m is not positive", self.length)));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::param("temperature", format!("{} K is not positive", self.temperature)));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::param("gamma", "negative"));
        }
        if self.raman.gain.iter().any(|&g| g < 0.0) {
            return Err(Error::param("raman", "negative gain"));
        }
        if !(self.signal_center < self.pump_center && self.idler_center > self.pump_center) {
            return Err(Error::param("band centers", "signal must lie below and idler above the pump"));
        }
        Ok(())
    }
}

/// Second moments of one spool's Stokes (signal) and anti-Stokes (idler)
/// output on two grids.
#[derive(Debug, Clone)]
pub struct SpoolMoments {
    /// `J = ⟨a_s a_a⟩`, signal rows, idler columns.
    pub jsa: CMat,
    /// Pair-emission parts of the occupations.
    pub pair_signal: CMat,
    pub pair_idler: CMat,
    pub raman_signal: CMat,
    pub raman_idler: CMat,
    /// `⟨a_s†a_s⟩` including Raman.
    pub n_signal: CMat,
    /// `⟨a_a†a_a⟩` including Raman.
    pub n_idler: CMat,
}

impl SpoolMoments {
    pub fn from_parts(jsa: CMat, pair_signal: CMat, pair_idler: CMat, raman_signal: CMat, raman_idler: CMat) -> Self {
        let mut n_signal = &pair_signal + &raman_signal;
        let mut n_idler = &pair_idler + &raman_idler;
        linalg::hermitize(&mut n_signal);
        linalg::hermitize(&mut n_idler);
        Self { jsa, pair_signal, pair_idler, raman_signal, raman_idler, n_signal, n_idler }
    }

    /// Pair-emission part of `⟨a_s,m† a_s,m⟩`.
    pub fn fwm_signal_diagonal(&self) -> Vec<f64> {
        self.pair_signal.diagonal().iter().map(|z| z.re).collect()
    }

    /// Largest Schmidt-mode pair probability (top eigenvalue of the
    /// pair-emission signal occupation).
    pub fn dominant_occupation(&self) -> f64 {
        let n = self.pair_signal.nrows();
        if n == 0 {
            return 0.0;
        }
        let g = &self.pair_signal;
        let mut v = crate::CVec::from_element(n, C64::new(1.0, 0.0));
        let mut lambda = 0.0;
        for _ in 0..200 {
            let w = g * &v;
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            let next = norm / v.norm();
            v = w / C64::new(norm, 0.0);
            if (next - lambda).abs() <= 1e-12 * next {
                return next;
            }
            lambda = next;
        }
        lambda
    }

    /// Frobenius norm of `[a_s, a_s†] − I` for the input–output map
    /// `a_s = α b_s + J b_a†` with the commutator-preserving second-order
    /// choice `α = I + JJᴴ/2`, `J` spanning all partners. The residual is
    /// `(JJᴴ)²/4`.
    pub fn commutator_residual(&self) -> f64 {
        let jj = self.pair_signal.transpose();
        let n = jj.nrows();
        let alpha = CMat::identity(n, n) + &jj * C64::new(0.5, 0.0);
        let comm = linalg::mul(&alpha, &alpha.adjoint()) - &jj;
        (comm - CMat::identity(n, n)).norm()
    }
}

/// Which fiber spool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spool {
    Right,
    Left,
}

/// One labeled block of field modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Register {
    pub spool: Spool,
    pub band: Band,
    pub grid: FrequencyGrid,
}

/// Joint state of both spools. Spools are independent, so cross-spool
/// moments vanish and only per-spool blocks are stored.
#[derive(Debug, Clone)]
pub struct GaussianMoments {
    pub signal_grid: FrequencyGrid,
    pub idler_grid: FrequencyGrid,
    pub right: SpoolMoments,
    pub left: SpoolMoments,
}

impl GaussianMoments {
    /// Register order of [`GaussianMoments::to_dense`].
    pub fn registers(&self) -> [Register; 4] {
        [
            Register { spool: Spool::Right, band: Band::Stokes, grid: self.signal_grid },
            Register { spool: Spool::Right, band: Band::AntiStokes, grid: self.idler_grid },
            Register { spool: Spool::Left, band: Band::Stokes, grid: self.signal_grid },
            Register { spool: Spool::Left, band: Band::AntiStokes, grid: self.idler_grid },
        ]
    }

    pub fn spool(&self, s: Spool) -> &SpoolMoments {
        match s {
            Spool::Right => &self.right,
            Spool::Left => &self.left,
        }
    }

    /// Full `(N, M)` over all registers. Sized `2(ns + na)`; meant for
    /// small grids and checks.
    pub fn to_dense(&self) -> (CMat, CMat) {
        let (ns, na) = (self.signal_grid.n_points, self.idler_grid.n_points);
        let dim = 2 * (ns + na);
        let mut n = CMat::zeros(dim, dim);
        let mut m = CMat::zeros(dim, dim);
        for (o, sp) in [(0, &self.right), (ns + na, &self.left)] {
            n.view_mut((o, o), (ns, ns)).copy_from(&sp.n_signal);
            n.view_mut((o + ns, o + ns), (na, na)).copy_from(&sp.n_idler);
            m.view_mut((o, o + ns), (ns, na)).copy_from(&sp.jsa);
            m.view_mut((o + ns, o), (na, ns)).copy_from(&sp.jsa.transpose());
        }
        (n, m)
    }
}

/// Moments of both spools (identical parameters, independent baths).
pub fn source_moments(
    pump: &PumpPulse,
    params: &SourceParams,
    signal_grid: &FrequencyGrid,
    idler_grid: &FrequencyGrid,
) -> Result<GaussianMoments> {
    params.validate()?;
    let tol = pump.grid.spacing();
    for (what, grid, want) in [
        ("pump grid", &pump.grid, params.pump_center),
        ("signal grid", signal_grid, params.signal_center),
        ("idler grid", idler_grid, params.idler_center),
    ] {
        if (grid.center - want).abs() > tol {
            return Err(Error::GridMismatch(format!("{what} not centered on its band")));
        }
    }
    let gl = params.gamma_l();
    let jsa = fwm_joint_amplitude(pump, gl, signal_grid, idler_grid)?;
    let ps = pair_occupation(pump, gl, signal_grid)?;
    let pi = pair_occupation(pump, gl, idler_grid)?;
    let rs = raman_moments(pump, params, signal_grid, Band::Stokes)?;
    let ra = raman_moments(pump, params, idler_grid, Band::AntiStokes)?;
    let spool = SpoolMoments::from_parts(jsa, ps, pi, rs, ra);
    let top = spool.dominant_occupation();
    if top > MAX_PAIR_PROBABILITY {
        return Err(Error::GainTooHigh(top));
    }
    Ok(GaussianMoments { signal_grid: *signal_grid, idler_grid: *idler_grid, right: spool.clone(), left: spool })
}

/// Mean number of pair-emitted signal photons per pulse inside the filter,
/// `Σₘ |h(ωₘ)|² N_fwm[m,m]` (Raman photons excluded).
pub fn pair_production_probability(moments: &GaussianMoments, band_filter: &FilterProfile) -> Result<f64> {
    band_filter.grid.check_same(&moments.signal_grid, "pair filter vs signal grid")?;
    Ok(filtered_pairs(&moments.right.pair_signal, band_filter))
}

fn filtered_pairs(pairs: &CMat, filter: &FilterProfile) -> f64 {
    pairs.diagonal().iter().zip(&filter.amplitude).map(|(n, h)| h.norm_sqr() * n.re).sum()
}

/// Result of matching the pump energy to a pair probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Pulse energy per spool, J.
    pub pump_energy: f64,
    /// `γL`, 1/W (fixed by the fiber).
    pub gamma_l: f64,
    /// Pair probability reached.
    pub pair_probability: f64,
}

/// Pump energy that makes the filtered pair probability equal `target`.
/// `γ` and `L` are physical constants of the fiber; the energy is the one
/// free parameter, and it also fixes the Raman level. Pair emission scales
/// with the square of the pulse energy.
pub fn calibrate_gain(
    target: f64,
    pump: &PumpPulse,
    params: &SourceParams,
    band_filter: &FilterProfile,
) -> Result<Calibration> {
    if !(0.0..MAX_PAIR_PROBABILITY).contains(&target) {
        return Err(Error::GainTooHigh(target));
    }
    let gamma_l = params.gamma_l();
    if target == 0.0 {
        return Ok(Calibration { pump_energy: 0.0, gamma_l, pair_probability: 0.0 });
    }
    if !(gamma_l > 0.0) {
        return Err(Error::param("gamma", "zero nonlinearity cannot reach a non-zero pair probability"));
    }
    let unit = pump.with_energy(1.0);
    let p1 = filtered_pairs(&pair_occupation(&unit, gamma_l, &band_filter.grid)?, band_filter);
    if !(p1 > 0.0) {
        return Err(Error::Numerical("filter passes no pair emission".into()));
    }
    let pump_energy = (target / p1).sqrt();
    Ok(Calibration { pump_energy, gamma_l, pair_probability: p1 * pump_energy * pump_energy })
}

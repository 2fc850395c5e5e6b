//! Gaussian-dip least squares: `C(τ) = C_b·[1 − V·exp(−(τ−τ₀)²/(2σ²))]`.

use super::scan::DelayScan;
use crate::error::{Error, Result};
use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DMatrix, DVector, Dyn};

/// Fewest rows accepted by the fit.
pub const MIN_ROWS: usize = 5;
/// The delays must span this many estimated dip widths.
pub const MIN_SPAN_WIDTHS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Fourfold,
    /// Raw A–B coincidences.
    Twofold,
    /// A–B coincidences minus adjacent-slot accidentals.
    TwofoldAccSub,
}

impl Observable {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fourfold" => Ok(Observable::Fourfold),
            "twofold" => Ok(Observable::Twofold),
            "twofold_accsub" => Ok(Observable::TwofoldAccSub),
            other => Err(Error::Config(format!(
                "unknown observable `{other}` (fourfold, twofold, twofold_accsub)"
            ))),
        }
    }

    pub fn values(self, scan: &DelayScan) -> Vec<f64> {
        scan.rows
            .iter()
            .map(|r| match self {
                Observable::Fourfold => r.p4,
                Observable::Twofold => r.p2_ab,
                Observable::TwofoldAccSub => r.p2_ab - r.p2_acc,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityFit {
    pub visibility: f64,
    pub visibility_err: f64,
    /// Dip center, s.
    pub tau0: f64,
    pub tau0_err: f64,
    /// Gaussian width, s.
    pub sigma: f64,
    pub sigma_err: f64,
    pub baseline: f64,
    pub baseline_err: f64,
    /// Covariance of (baseline, V, τ₀, σ) in the units above.
    pub covariance: [[f64; 4]; 4],
    pub chi2: f64,
    pub dof: usize,
}

impl VisibilityFit {
    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        format!(
            "V = {:.6}\nV_err = {:.6}\ntau0_ps = {:.6}\nsigma_ps = {:.6}\nbaseline = {:.6e}\n",
            self.visibility,
            self.visibility_err,
            self.tau0 * 1e12,
            self.sigma * 1e12,
            self.baseline
        )
    }
}

/// Dimensionless problem: x and y scaled to order one, σ as its log.
struct DipProblem {
    x: Vec<f64>,
    y: Vec<f64>,
    inv_err: Vec<f64>,
    /// baseline, V, center, ln width
    p: DVector<f64>,
}

impl DipProblem {
    fn gauss(&self, x: f64) -> f64 {
        let s = self.p[3].exp();
        (-(x - self.p[2]).powi(2) / (2.0 * s * s)).exp()
    }
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for DipProblem {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, p: &DVector<f64>) {
        self.p.copy_from(p);
    }

    fn params(&self) -> DVector<f64> {
        self.p.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let (b, v) = (self.p[0], self.p[1]);
        Some(DVector::from_iterator(
            self.x.len(),
            self.x.iter().zip(&self.y).zip(&self.inv_err).map(|((&x, &y), &w)| (b * (1.0 - v * self.gauss(x)) - y) * w),
        ))
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let (b, v, c) = (self.p[0], self.p[1], self.p[2]);
        let s2 = (2.0 * self.p[3]).exp();
        let mut j = DMatrix::zeros(self.x.len(), 4);
        for (i, (&x, &w)) in self.x.iter().zip(&self.inv_err).enumerate() {
            let g = self.gauss(x);
            let dx = x - c;
            j[(i, 0)] = (1.0 - v * g) * w;
            j[(i, 1)] = -b * g * w;
            j[(i, 2)] = -b * v * g * dx / s2 * w;
            j[(i, 3)] = -b * v * g * dx * dx / s2 * w;
        }
        Some(j)
    }
}

/// Fit a dip to `(taus, values)`. With `errors`, residuals are weighted and
/// the covariance uses them as absolute uncertainties; without, the
/// covariance is scaled by the reduced χ².
pub fn fit_dip(taus: &[f64], values: &[f64], errors: Option<&[f64]>, dip_width: Option<f64>) -> Result<VisibilityFit> {
    let n = taus.len();
    if n != values.len() || errors.is_some_and(|e| e.len() != n) {
        return Err(Error::Fit("delay, value and error columns differ in length".into()));
    }
    if n < MIN_ROWS {
        return Err(Error::Fit(format!("{n} rows; at least {MIN_ROWS} are needed")));
    }
    if taus.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite data".into()));
    }
    let (t_lo, t_hi) = taus.iter().fold((f64::MAX, f64::MIN), |(a, b), &t| (a.min(t), b.max(t)));
    let span = t_hi - t_lo;
    if let Some(w) = dip_width {
        if span < MIN_SPAN_WIDTHS * w {
            return Err(Error::Fit(format!(
                "delays span {:.3} ps, less than {MIN_SPAN_WIDTHS} dip widths ({:.3} ps)",
                span * 1e12,
                MIN_SPAN_WIDTHS * w * 1e12
            )));
        }
    }
    if !(span > 0.0) {
        return Err(Error::Fit("all delays coincide".into()));
    }
    let y_max = values.iter().cloned().fold(f64::MIN, f64::max);
    let y_min = values.iter().cloned().fold(f64::MAX, f64::min);
    let t_mid = 0.5 * (t_lo + t_hi);
    let t_scale = 0.5 * span;
    if !(y_max > 0.0) {
        return Err(Error::Fit("no positive data".into()));
    }
    if y_max - y_min <= 1e-12 * y_max {
        log::warn!("flat data: visibility pinned to 0");
        let mean = values.iter().sum::<f64>() / n as f64;
        return Ok(VisibilityFit {
            visibility: 0.0,
            visibility_err: 0.0,
            tau0: t_mid,
            tau0_err: f64::INFINITY,
            sigma: t_scale,
            sigma_err: f64::INFINITY,
            baseline: mean,
            baseline_err: 0.0,
            covariance: [[0.0; 4]; 4],
            chi2: 0.0,
            dof: n - 4,
        });
    }
    let x: Vec<f64> = taus.iter().map(|t| (t - t_mid) / t_scale).collect();
    let y: Vec<f64> = values.iter().map(|v| v / y_max).collect();
    let inv_err: Vec<f64> = match errors {
        Some(e) => e
            .iter()
            .map(|&s| if s > 0.0 { y_max / s } else { f64::NAN })
            .collect(),
        None => vec![1.0; n],
    };
    if inv_err.iter().any(|w| !w.is_finite()) {
        return Err(Error::Fit("errors must be positive".into()));
    }
    // start from (min, max, centroid) of the data
    let lo = y_min / y_max;
    let depth: Vec<f64> = y.iter().map(|v| 1.0 - v).collect();
    let total: f64 = depth.iter().sum();
    let c0 = depth.iter().zip(&x).map(|(d, x)| d * x).sum::<f64>() / total;
    let half = 0.5 * (1.0 + lo);
    let below = y.iter().filter(|&&v| v <= half).count().max(1);
    let dx = 2.0 / (n - 1) as f64;
    let s0 = (below as f64 * dx / 2.3548).clamp(0.5 * dx, 1.0);
    let problem = DipProblem {
        x: x.clone(),
        y,
        inv_err,
        p: DVector::from_vec(vec![1.0, 1.0 - lo, c0, s0.ln()]),
    };
    let (fitted, report) = LevenbergMarquardt::new().with_patience(200).minimize(problem);
    if !report.termination.was_successful() {
        return Err(Error::Fit(format!("solver stopped: {:?}", report.termination)));
    }
    let p = fitted.params();
    let r = fitted.residuals().ok_or_else(|| Error::Fit("residuals unavailable".into()))?;
    let j = fitted.jacobian().ok_or_else(|| Error::Fit("jacobian unavailable".into()))?;
    let chi2 = r.norm_squared();
    let dof = n - 4;
    let jtj = j.transpose() * &j;
    let mut cov = jtj
        .try_inverse()
        .ok_or_else(|| Error::Fit("singular normal matrix (parameters not identifiable)".into()))?;
    if errors.is_none() {
        cov *= if dof > 0 { chi2 / dof as f64 } else { 0.0 };
    }
    // back to physical units: baseline·y_max, V, t_mid + c·t_scale, e^q·t_scale
    let sigma = p[3].exp() * t_scale;
    let jac = [y_max, 1.0, t_scale, sigma];
    let mut covariance = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            covariance[a][b] = cov[(a, b)] * jac[a] * jac[b];
        }
    }
    let err = |k: usize| covariance[k][k].max(0.0).sqrt();
    let mut fit = VisibilityFit {
        visibility: p[1],
        visibility_err: err(1),
        tau0: t_mid + p[2] * t_scale,
        tau0_err: err(2),
        sigma,
        sigma_err: err(3),
        baseline: p[0] * y_max,
        baseline_err: err(0),
        covariance,
        chi2,
        dof,
    };
    if !(fit.sigma > 0.0) || !fit.visibility.is_finite() {
        return Err(Error::Fit("fit produced a degenerate width".into()));
    }
    fit.tau0_err = fit.tau0_err.max(0.0);
    Ok(fit)
}

/// Fit the chosen observable of a scan.
pub fn fit_visibility(scan: &DelayScan, observable: Observable) -> Result<VisibilityFit> {
    fit_dip(&scan.taus(), &observable.values(scan), None, scan.dip_width)
}

use super::scenario::Scenario;
use crate::detection::{coincidence_from_no_click, ClickEvaluator, DetectorSet};
use crate::error::{Error, Result};
use crate::network::{Detector, ProjectionPlan};
use crate::source::{source_moments, GaussianMoments};
use crate::units::{ps_to_s, s_to_ps};
use rayon::prelude::*;
use std::io::{Read, Write};

pub const CSV_HEADER: &str = "tau_ps, p4, p2_ab, p2_acc, pA, pB, pC, pD";

/// Probabilities at one delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    /// Delay, s.
    pub tau: f64,
    /// All four detectors click.
    pub p4: f64,
    /// A and B click.
    pub p2_ab: f64,
    /// `P(A)·P(B)`, the adjacent-slot accidental rate.
    pub p2_acc: f64,
    /// Singles A..D.
    pub singles: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayScan {
    pub label: String,
    pub rows: Vec<ScanRow>,
    /// Expected dip width, s, when known.
    pub dip_width: Option<f64>,
}

/// Click probabilities at one delay from precomputed moments.
pub fn scan_row(plan: &ProjectionPlan, weights: &[Vec<f64>; 4], dark: [f64; 4], tau: f64) -> Result<ScanRow> {
    let dm = plan.project(tau);
    let ev = ClickEvaluator::new(&dm, weights, dark)?;
    let e = ev.all_no_click()?;
    let p4 = coincidence_from_no_click(&e, DetectorSet::ALL)?;
    let p2_ab = coincidence_from_no_click(&e, DetectorSet::of(&[Detector::A, Detector::B]))?;
    let singles = Detector::ALL.map(|d| (1.0 - e[1 << d.index()]).max(0.0));
    Ok(ScanRow { tau, p4, p2_ab, p2_acc: singles[0] * singles[1], singles })
}

/// Source moments of a scenario (τ-independent).
pub fn scenario_moments(sc: &Scenario) -> Result<GaussianMoments> {
    source_moments(&sc.pump, &sc.params, &sc.signal_grid(), &sc.idler_grid())
}

/// Sweep the scenario's delays. Rows are evaluated in parallel and returned
/// in delay order; the first failing row aborts the scan.
pub fn run_delay_scan(sc: &Scenario) -> Result<DelayScan> {
    let moments = scenario_moments(sc)?;
    let plan = ProjectionPlan::new(&moments, &sc.bases)?;
    let weights = [0, 1, 2, 3].map(|i| sc.detectors[i].weights());
    let dark = [0, 1, 2, 3].map(|i| sc.detectors[i].dark_mean);
    let rows: Vec<Result<ScanRow>> = sc.taus.par_iter().map(|&t| scan_row(&plan, &weights, dark, t)).collect();
    let rows = rows
        .into_iter()
        .zip(&sc.taus)
        .map(|(r, &t)| r.map_err(|e| Error::ScanRow { tau_ps: s_to_ps(t), source: Box::new(e) }))
        .collect::<Result<Vec<_>>>()?;
    Ok(DelayScan { label: sc.label.clone(), rows, dip_width: Some(sc.dip_width) })
}

impl DelayScan {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{}, {:e}, {:e}, {:e}, {:e}, {:e}, {:e}, {:e}",
                s_to_ps(r.tau),
                r.p4,
                r.p2_ab,
                r.p2_acc,
                r.singles[0],
                r.singles[1],
                r.singles[2],
                r.singles[3]
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ASCII output")
    }

    /// Read a scan written by [`DelayScan::write_csv`].
    pub fn read_csv<R: Read>(r: R, origin: &str) -> Result<DelayScan> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let perr = |line: usize, reason: String| Error::Parse { path: origin.to_string(), line, reason };
        let headers = rdr.headers().map_err(|e| perr(1, e.to_string()))?.clone();
        let want: Vec<&str> = CSV_HEADER.split(", ").collect();
        if headers.iter().collect::<Vec<_>>() != want {
            return Err(perr(1, format!("expected header `{CSV_HEADER}`")));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| perr(line, e.to_string()))?;
            let v = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| perr(line, format!("bad number `{s}`"))))
                .collect::<Result<Vec<f64>>>()?;
            if v.iter().skip(1).any(|p| !(0.0..=1.0).contains(p)) {
                return Err(perr(line, "probability outside [0, 1]".into()));
            }
            rows.push(ScanRow {
                tau: ps_to_s(v[0]),
                p4: v[1],
                p2_ab: v[2],
                p2_acc: v[3],
                singles: [v[4], v[5], v[6], v[7]],
            });
        }
        if rows.is_empty() {
            return Err(perr(1, "no data rows".into()));
        }
        Ok(DelayScan { label: origin.to_string(), rows, dip_width: None })
    }

    pub fn taus(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.tau).collect()
    }

    /// Relative change of `p4` across the outermost 10% of the delay range,
    /// worst of the two ends.
    pub fn plateau_slope(&self) -> f64 {
        let n = self.rows.len();
        if n < 3 {
            return 0.0;
        }
        let t0 = self.rows[0].tau;
        let t1 = self.rows[n - 1].tau;
        let span = t1 - t0;
        let edge = 0.1 * span;
        let mut worst = 0.0f64;
        for side in [true, false] {
            let pts: Vec<&ScanRow> = self
                .rows
                .iter()
                .filter(|r| if side { r.tau >= t1 - edge } else { r.tau <= t0 + edge })
                .collect();
            if pts.len() < 2 {
                continue;
            }
            let (a, b) = (pts[0], pts[pts.len() - 1]);
            let mean = 0.5 * (a.p4 + b.p4);
            if mean > 0.0 {
                worst = worst.max(((b.p4 - a.p4) / mean).abs());
            }
        }
        worst
    }
}

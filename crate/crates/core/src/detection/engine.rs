use crate::error::{Error, Result};
use crate::linalg;
use crate::network::{DetectionMoments, Detector, DetectorModel};
use crate::{CMat, C64};

/// Modes with weight at or below this contribute nothing and are dropped.
pub const WEIGHT_FLOOR: f64 = 1e-12;
/// Absolute occupation below which a detector-local mode counts as vacuum.
const SUPPORT_FLOOR: f64 = 1e-15;
/// Probabilities this far below zero are rounding; further is an error.
const NEGATIVE_SLACK: f64 = 1e-12;

/// Mean dark count per gate for a dark-click probability `p`.
pub fn dark_mean(p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::param("dark probability", format!("{p} outside [0, 1)")));
    }
    Ok(-(-p).ln_1p())
}

/// A set of detectors as a bit mask (A = bit 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct DetectorSet(pub u8);

impl DetectorSet {
    pub const EMPTY: DetectorSet = DetectorSet(0);
    pub const ALL: DetectorSet = DetectorSet(0b1111);

    pub fn of(ds: &[Detector]) -> Self {
        DetectorSet(ds.iter().fold(0, |m, d| m | (1 << d.index())))
    }

    pub fn contains(self, d: Detector) -> bool {
        self.0 & (1 << d.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Detector> {
        Detector::ALL.into_iter().filter(move |&d| self.contains(d))
    }

    /// Every subset, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = DetectorSet> {
        (0..=self.0).filter(move |s| s & !self.0 == 0).map(DetectorSet)
    }

    pub fn label(self) -> String {
        self.iter().map(|d| d.name()).collect()
    }
}

/// `⟨:Π exp(−Σ w n):⟩` for a zero-mean Gaussian state with normal moments
/// `N[i,j] = ⟨aᵢ† aⱼ⟩`, anomalous moments `M[i,j] = ⟨aᵢ aⱼ⟩` and a
/// Hermitian PSD weight matrix `W`: `det(I + Q·W̃)^(-1/2)` with
/// `Q = [[Nᵀ, M], [M*, N]]`, `W̃ = diag(W, W*)`.
pub fn gaussian_no_click(n: &CMat, m: &CMat, w: &CMat) -> Result<f64> {
    let k = n.nrows();
    if k == 0 {
        return Ok(1.0);
    }
    let mut q = CMat::zeros(2 * k, 2 * k);
    q.view_mut((0, 0), (k, k)).copy_from(&n.transpose());
    q.view_mut((0, k), (k, k)).copy_from(m);
    q.view_mut((k, 0), (k, k)).copy_from(&m.map(|z| z.conj()));
    q.view_mut((k, k), (k, k)).copy_from(n);
    let mut wt = CMat::zeros(2 * k, 2 * k);
    wt.view_mut((0, 0), (k, k)).copy_from(w);
    wt.view_mut((k, k), (k, k)).copy_from(&w.map(|z| z.conj()));
    let a = CMat::identity(2 * k, 2 * k) + linalg::mul(&q, &wt);
    let d = linalg::det(a);
    if !(d.re > 0.0) || !d.re.is_finite() || d.im.abs() > 1e-6 * d.re.abs() {
        return Err(Error::Unphysical(format!("no-click determinant {d} is not positive")));
    }
    Ok(d.re.powf(-0.5))
}

/// Which detectors are off and the mode weights `η·χ` of every detector.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickQuery {
    pub off: DetectorSet,
    pub weights: [Vec<f64>; 4],
    pub dark_means: [f64; 4],
}

impl ClickQuery {
    pub fn new(off: DetectorSet, detectors: &[DetectorModel; 4]) -> Self {
        Self {
            off,
            weights: [0, 1, 2, 3].map(|i| detectors[i].weights()),
            dark_means: [0, 1, 2, 3].map(|i| detectors[i].dark_mean),
        }
    }
}

/// Probability that every detector in `query.off` stays dark.
pub fn no_click_expectation(moments: &DetectionMoments, query: &ClickQuery) -> Result<f64> {
    ClickEvaluator::new(moments, &query.weights, query.dark_means)?.no_click(query.off)
}

/// Detection moments reduced, per detector, to the modes that are both
/// weighted and occupied. Vacuum modes factor out of the no-click
/// expectation, so the reduction is exact up to `SUPPORT_FLOOR`.
#[derive(Debug, Clone)]
pub struct ClickEvaluator {
    blocks: [std::ops::Range<usize>; 4],
    normal: CMat,
    anomalous: CMat,
    weight: CMat,
    dark_means: [f64; 4],
    pub tau: f64,
}

impl ClickEvaluator {
    pub fn new(moments: &DetectionMoments, weights: &[Vec<f64>; 4], dark_means: [f64; 4]) -> Result<Self> {
        let mut bases = Vec::with_capacity(4);
        let mut ws = Vec::with_capacity(4);
        for d in Detector::ALL {
            let idx = moments.indices(d);
            let w = &weights[d.index()];
            if w.len() != idx.len() {
                return Err(Error::param(
                    "weights",
                    format!("detector {} has {} modes but {} weights", d.name(), idx.len(), w.len()),
                ));
            }
            if let Some(bad) = w.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::param("weights", format!("{bad} outside [0, 1]")));
            }
            let mu = dark_means[d.index()];
            if !(mu >= 0.0) || !mu.is_finite() {
                return Err(Error::param("dark mean", format!("{mu} is negative")));
            }
            let live: Vec<usize> = (0..idx.len()).filter(|&j| w[j] > WEIGHT_FLOOR).collect();
            let rows: Vec<usize> = live.iter().map(|&j| idx[j]).collect();
            let nb = CMat::from_fn(rows.len(), rows.len(), |i, j| moments.normal[(rows[i], rows[j])]);
            // occupied directions of this detector's modes: eigenvectors of Nᵀ
            let (vals, vecs) = linalg::hermitian_eigen(&nb.transpose())?;
            let keep = vals.iter().take_while(|&&v| v > SUPPORT_FLOOR).count();
            let p = vecs.columns(0, keep).into_owned();
            // global embedding: columns over all detection modes
            let mut embed = CMat::zeros(moments.len(), keep);
            for (i, &r) in rows.iter().enumerate() {
                embed.row_mut(r).copy_from(&p.row(i));
            }
            let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                live.len(),
                live.iter().map(|&j| C64::new(w[j], 0.0)),
            ));
            let mut wm = p.adjoint() * diag * &p;
            linalg::hermitize(&mut wm);
            bases.push(embed);
            ws.push(wm);
        }
        let sizes: Vec<usize> = bases.iter().map(|b| b.ncols()).collect();
        let total: usize = sizes.iter().sum();
        let mut p = CMat::zeros(moments.len(), total);
        let mut blocks: [std::ops::Range<usize>; 4] = Default::default();
        let mut o = 0;
        for (i, b) in bases.iter().enumerate() {
            p.view_mut((0, o), (b.nrows(), b.ncols())).copy_from(b);
            blocks[i] = o..o + b.ncols();
            o += b.ncols();
        }
        let conj_p = p.map(|z| z.conj());
        let mut normal = linalg::mul(&linalg::mul(&p.transpose(), &moments.normal), &conj_p);
        linalg::hermitize(&mut normal);
        let anomalous = linalg::mul(&linalg::mul(&p.adjoint(), &moments.anomalous), &conj_p);
        let wrefs: Vec<&CMat> = ws.iter().collect();
        let weight = linalg::block_diag(&wrefs);
        Ok(Self { blocks, normal, anomalous, weight, dark_means, tau: moments.tau })
    }

    /// Reduced dimension per detector.
    pub fn ranks(&self) -> [usize; 4] {
        [0, 1, 2, 3].map(|i| self.blocks[i].len())
    }

    /// Probability that every detector in `off` stays dark.
    pub fn no_click(&self, off: DetectorSet) -> Result<f64> {
        let rows: Vec<usize> = off.iter().flat_map(|d| self.blocks[d.index()].clone()).collect();
        let pick = |m: &CMat| CMat::from_fn(rows.len(), rows.len(), |i, j| m[(rows[i], rows[j])]);
        let e = gaussian_no_click(&pick(&self.normal), &pick(&self.anomalous), &pick(&self.weight))?;
        let mu: f64 = off.iter().map(|d| self.dark_means[d.index()]).sum();
        Ok(e * (-mu).exp())
    }

    /// No-click probabilities for all 16 subsets, indexed by mask.
    pub fn all_no_click(&self) -> Result<[f64; 16]> {
        let mut out = [1.0; 16];
        for s in 1..16u8 {
            out[s as usize] = self.no_click(DetectorSet(s))?;
        }
        Ok(out)
    }

    /// Probability that every detector in `on` clicks (others unrestricted).
    pub fn coincidence(&self, on: DetectorSet) -> Result<f64> {
        let mut e = [1.0; 16];
        for s in on.subsets() {
            e[s.0 as usize] = self.no_click(s)?;
        }
        coincidence_from_no_click(&e, on)
    }
}

/// Inclusion–exclusion `Σ_{R⊆S} (−1)^|R| E_R` with tiny negatives clamped.
pub fn coincidence_from_no_click(e: &[f64; 16], on: DetectorSet) -> Result<f64> {
    let mut p = 0.0;
    for s in on.subsets() {
        let sign = if s.len() % 2 == 0 { 1.0 } else { -1.0 };
        p += sign * e[s.0 as usize];
    }
    if p < -NEGATIVE_SLACK {
        return Err(Error::NegativeProbability { value: p, subset: on.label() });
    }
    Ok(p.max(0.0))
}

fn evaluator(moments: &DetectionMoments, detectors: &[DetectorModel; 4]) -> Result<ClickEvaluator> {
    let q = ClickQuery::new(DetectorSet::EMPTY, detectors);
    ClickEvaluator::new(moments, &q.weights, q.dark_means)
}

/// Probability that every detector in `on` clicks.
pub fn coincidence_probability(moments: &DetectionMoments, detectors: &[DetectorModel; 4], on: DetectorSet) -> Result<f64> {
    evaluator(moments, detectors)?.coincidence(on)
}

pub fn singles_probability(moments: &DetectionMoments, detectors: &[DetectorModel; 4], d: Detector) -> Result<f64> {
    Ok(1.0 - evaluator(moments, detectors)?.no_click(DetectorSet::of(&[d]))?)
}

/// `P(d1)·P(d2)`, the coincidence expected from uncorrelated clicks.
pub fn accidental_probability(
    moments: &DetectionMoments,
    detectors: &[DetectorModel; 4],
    d1: Detector,
    d2: Detector,
) -> Result<f64> {
    let ev = evaluator(moments, detectors)?;
    let p1 = 1.0 - ev.no_click(DetectorSet::of(&[d1]))?;
    let p2 = 1.0 - ev.no_click(DetectorSet::of(&[d2]))?;
    Ok(p1 * p2)
}

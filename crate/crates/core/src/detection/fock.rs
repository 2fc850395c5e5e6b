//! Brute-force photon-number oracle for up to four modes.
//!
//! Input states are products of per-mode states (vacuum, Fock, thermal,
//! squeezed vacuum) and two-mode squeezed pairs, followed by a passive
//! interferometer `U` acting as `aᵢ† → Σⱼ Uⱼᵢ aⱼ†`. Kets are expanded in the
//! Fock basis by applying creation operators one at a time, so nothing here
//! shares code with the Gaussian engine.

use crate::error::{Error, Result};
use crate::{CMat, C64};
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::BuildHasherDefault;

pub const MAX_MODES: usize = 4;
pub const MAX_CUTOFF: usize = 40;
/// Required captured trace after truncation.
pub const TRACE_TOLERANCE: f64 = 1e-9;
/// Per-factor tail below which a series is cut before `cutoff`.
const TAIL: f64 = 1e-11;

type Occ = [u8; MAX_MODES];
// Fixed-key hasher: iteration order, and therefore every floating-point
// sum, is reproducible between runs.
type Ket = HashMap<Occ, C64, BuildHasherDefault<DefaultHasher>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeInput {
    Vacuum,
    Fock(usize),
    Thermal(f64),
    /// `exp[(ξ* a² − ξ a†²)/2]|0⟩` with `ξ = r·e^{iθ}`.
    Squeezed { r: f64, phase: f64 },
}

/// `exp(ξ* a b − ξ a† b†)|0,0⟩` with `ξ = r·e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSqueezer {
    pub modes: (usize, usize),
    pub r: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub inputs: Vec<ModeInput>,
    pub pairs: Vec<PairSqueezer>,
    /// Passive unitary; identity when `None`.
    pub unitary: Option<CMat>,
    pub cutoff: usize,
}

/// Photon statistics of the state after the interferometer.
#[derive(Debug, Clone)]
pub struct FockState {
    pub n_modes: usize,
    /// `P(n)` over output occupations.
    pub distribution: BTreeMap<Occ, f64>,
    /// `⟨aᵢ† aⱼ⟩` and `⟨aᵢ aⱼ⟩` evaluated on the kets.
    pub normal: CMat,
    pub anomalous: CMat,
    /// Trace kept after truncation.
    pub captured: f64,
}

fn vacuum() -> Ket {
    let mut k = Ket::default();
    k.insert([0; MAX_MODES], C64::new(1.0, 0.0));
    k
}

fn create(ket: &Ket, mode: usize) -> Ket {
    let mut out = Ket::default();
    for (occ, &amp) in ket {
        let mut o = *occ;
        o[mode] += 1;
        *out.entry(o).or_default() += amp * (o[mode] as f64).sqrt();
    }
    out
}

fn annihilate(ket: &Ket, mode: usize) -> Ket {
    let mut out = Ket::default();
    for (occ, &amp) in ket {
        if occ[mode] == 0 {
            continue;
        }
        let mut o = *occ;
        o[mode] -= 1;
        *out.entry(o).or_default() += amp * (occ[mode] as f64).sqrt();
    }
    out
}

fn inner(a: &Ket, b: &Ket) -> C64 {
    a.iter().filter_map(|(o, x)| b.get(o).map(|y| x.conj() * y)).sum()
}

fn norm_sqr(k: &Ket) -> f64 {
    k.values().map(|z| z.norm_sqr()).sum()
}

fn add_scaled(acc: &mut Ket, k: &Ket, c: C64) {
    for (o, x) in k {
        *acc.entry(*o).or_default() += x * c;
    }
}

/// Output-side creation operator `bᵢ† = Σⱼ Uⱼᵢ aⱼ†`.
struct Creator<'a> {
    u: Option<&'a CMat>,
    n: usize,
}

impl Creator<'_> {
    fn apply(&self, ket: &Ket, i: usize) -> Ket {
        let u = match self.u {
            None => return create(ket, i),
            Some(u) => u,
        };
        let mut out = Ket::default();
        for j in 0..self.n {
            let c = u[(j, i)];
            if c != C64::new(0.0, 0.0) {
                add_scaled(&mut out, &create(ket, j), c);
            }
        }
        out
    }
}

/// Index of the last term needed for the tail of `weights` to drop below
/// `TAIL`, capped at `cap`.
fn series_len(weights: impl Iterator<Item = f64>, cap: usize) -> usize {
    let mut acc = 0.0;
    for (k, w) in weights.enumerate().take(cap + 1) {
        acc += w;
        if 1.0 - acc < TAIL {
            return k;
        }
    }
    cap
}

impl StateSpec {
    pub fn new(inputs: Vec<ModeInput>) -> Self {
        Self { inputs, pairs: Vec::new(), unitary: None, cutoff: 30 }
    }

    pub fn with_pair(mut self, p: PairSqueezer) -> Self {
        self.pairs.push(p);
        self
    }

    pub fn with_unitary(mut self, u: CMat) -> Self {
        self.unitary = Some(u);
        self
    }

    pub fn n_modes(&self) -> usize {
        self.inputs.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_modes();
        if n == 0 || n > MAX_MODES {
            return Err(Error::param("fock modes", format!("{n} modes (1..={MAX_MODES} supported)")));
        }
        if self.cutoff > MAX_CUTOFF {
            return Err(Error::param("fock cutoff", format!("{} exceeds {MAX_CUTOFF}", self.cutoff)));
        }
        for inp in &self.inputs {
            match *inp {
                ModeInput::Fock(k) if k > self.cutoff => {
                    return Err(Error::param("fock input", format!("Fock({k}) above cutoff")))
                }
                ModeInput::Thermal(nb) if !(nb >= 0.0) || !nb.is_finite() => {
                    return Err(Error::param("thermal input", format!("mean {nb} is negative")))
                }
                ModeInput::Squeezed { r, .. } if !(r >= 0.0) || !r.is_finite() => {
                    return Err(Error::param("squeezing", format!("r = {r} is negative")))
                }
                _ => {}
            }
        }
        for p in &self.pairs {
            let (i, j) = p.modes;
            if i >= n || j >= n || i == j {
                return Err(Error::param("pair modes", format!("({i}, {j}) invalid for {n} modes")));
            }
            if !(p.r >= 0.0) || !p.r.is_finite() {
                return Err(Error::param("pair squeezing", format!("r = {} is negative", p.r)));
            }
            for k in [i, j] {
                let uses = self.pairs.iter().filter(|q| q.modes.0 == k || q.modes.1 == k).count();
                if self.inputs[k] != ModeInput::Vacuum || uses > 1 {
                    return Err(Error::param("pair modes", format!("mode {k} must be vacuum and used by one pair")));
                }
            }
        }
        if let Some(u) = &self.unitary {
            if u.nrows() != n || u.ncols() != n {
                return Err(Error::param("unitary", format!("{}×{} for {n} modes", u.nrows(), u.ncols())));
            }
            let dev = (u.adjoint() * u - CMat::identity(n, n)).iter().fold(0.0f64, |s, z| s.max(z.norm()));
            if dev > 1e-10 {
                return Err(Error::param("unitary", format!("not unitary (deviation {dev:.2e})")));
            }
        }
        Ok(())
    }

    /// Analytic `(N, M)` after the interferometer; `None` when a Fock input
    /// makes the state non-Gaussian.
    pub fn gaussian_moments(&self) -> Option<(CMat, CMat)> {
        let n = self.n_modes();
        let mut nm = CMat::zeros(n, n);
        let mut mm = CMat::zeros(n, n);
        for (i, inp) in self.inputs.iter().enumerate() {
            match *inp {
                ModeInput::Vacuum | ModeInput::Fock(0) => {}
                ModeInput::Fock(_) => return None,
                ModeInput::Thermal(nb) => nm[(i, i)] = C64::new(nb, 0.0),
                ModeInput::Squeezed { r, phase } => {
                    nm[(i, i)] = C64::new(r.sinh().powi(2), 0.0);
                    mm[(i, i)] = -C64::from_polar(r.sinh() * r.cosh(), phase);
                }
            }
        }
        for p in &self.pairs {
            let (i, j) = p.modes;
            let s2 = C64::new(p.r.sinh().powi(2), 0.0);
            nm[(i, i)] = s2;
            nm[(j, j)] = s2;
            let x = -C64::from_polar(p.r.sinh() * p.r.cosh(), p.phase);
            mm[(i, j)] = x;
            mm[(j, i)] = x;
        }
        if let Some(u) = &self.unitary {
            nm = u.map(|z| z.conj()) * nm * u.transpose();
            mm = u * mm * u.transpose();
        }
        Some((nm, mm))
    }

    pub fn build(&self) -> Result<FockState> {
        self.validate()?;
        let n = self.n_modes();
        let b = Creator { u: self.unitary.as_ref(), n };
        // pure inputs, each applied as a polynomial in the output creators
        let mut ket = vacuum();
        let mut thermal: Vec<(usize, Vec<f64>)> = Vec::new();
        for (i, inp) in self.inputs.iter().enumerate() {
            match *inp {
                ModeInput::Vacuum => {}
                ModeInput::Fock(k) => {
                    for l in 1..=k {
                        ket = b.apply(&ket, i);
                        ket.values_mut().for_each(|x| *x /= (l as f64).sqrt());
                    }
                }
                ModeInput::Squeezed { r, phase } => {
                    // Σₖ (−e^{iθ} tanh r)^k √((2k)!)/(2^k k! √cosh r) |2k⟩
                    let t = r.tanh();
                    let mut coef = Vec::new();
                    let mut c = 1.0 / r.cosh().sqrt();
                    let mut probs = Vec::new();
                    for k in 0..=self.cutoff / 2 {
                        if k > 0 {
                            c *= t * ((2 * k - 1) as f64 / (2 * k) as f64).sqrt();
                        }
                        coef.push(C64::from_polar(c, k as f64 * phase) * (-1f64).powi(k as i32));
                        probs.push(c * c);
                    }
                    let kmax = series_len(probs.into_iter(), self.cutoff / 2);
                    // (b†)^{2k}/√((2k)!) built two steps at a time
                    let mut acc = Ket::default();
                    let mut term = ket.clone();
                    add_scaled(&mut acc, &term, coef[0]);
                    for k in 1..=kmax {
                        for l in [2 * k - 1, 2 * k] {
                            term = b.apply(&term, i);
                            term.values_mut().for_each(|x| *x /= (l as f64).sqrt());
                        }
                        add_scaled(&mut acc, &term, coef[k]);
                    }
                    ket = acc;
                }
                ModeInput::Thermal(nb) => {
                    let q = nb / (1.0 + nb);
                    let kmax = series_len((0..).map(|k| q.powi(k) / (1.0 + nb)), self.cutoff);
                    thermal.push((i, (0..=kmax).map(|k| q.powi(k as i32) / (1.0 + nb)).collect()));
                }
            }
        }
        for p in &self.pairs {
            // Σₖ (−e^{iθ} tanh r)^k / cosh r |k,k⟩
            let t = p.r.tanh();
            let kmax = series_len((0..).map(|k| t.powi(2 * k) / p.r.cosh().powi(2)), self.cutoff);
            let mut acc = Ket::default();
            let mut term = ket.clone();
            add_scaled(&mut acc, &term, C64::new(1.0 / p.r.cosh(), 0.0));
            for k in 1..=kmax {
                term = b.apply(&b.apply(&term, p.modes.0), p.modes.1);
                term.values_mut().for_each(|x| *x /= k as f64);
                let c = C64::from_polar(t.powi(k as i32) / p.r.cosh(), k as f64 * p.phase) * (-1f64).powi(k as i32);
                add_scaled(&mut acc, &term, c);
            }
            ket = acc;
        }
        let mut out = FockState {
            n_modes: n,
            distribution: BTreeMap::new(),
            normal: CMat::zeros(n, n),
            anomalous: CMat::zeros(n, n),
            captured: 0.0,
        };
        mix_thermal(&b, &ket, &thermal, 1.0, &mut out);
        if out.captured < 1.0 - TRACE_TOLERANCE {
            return Err(Error::Numerical(format!(
                "Fock cutoff {} captures only {:.12} of the trace",
                self.cutoff, out.captured
            )));
        }
        Ok(out)
    }
}

/// Depth-first over thermal photon numbers: each branch applies
/// `(bᵢ†)^k/√k!` and leaves accumulate statistics with the branch weight.
fn mix_thermal(b: &Creator, ket: &Ket, thermal: &[(usize, Vec<f64>)], weight: f64, out: &mut FockState) {
    let Some(((mode, probs), rest)) = thermal.split_first() else {
        accumulate(ket, weight, out);
        return;
    };
    let mut term = ket.clone();
    for (k, p) in probs.iter().enumerate() {
        if k > 0 {
            term = b.apply(&term, *mode);
            term.values_mut().for_each(|x| *x /= (k as f64).sqrt());
        }
        mix_thermal(b, &term, rest, weight * p, out);
    }
}

fn accumulate(ket: &Ket, w: f64, out: &mut FockState) {
    let n = out.n_modes;
    let mut entries: Vec<(&Occ, &C64)> = ket.iter().collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    for (o, a) in entries {
        *out.distribution.entry(*o).or_insert(0.0) += w * a.norm_sqr();
    }
    out.captured += w * norm_sqr(ket);
    let down: Vec<Ket> = (0..n).map(|j| annihilate(ket, j)).collect();
    let up: Vec<Ket> = (0..n).map(|j| create(ket, j)).collect();
    for i in 0..n {
        for j in 0..n {
            out.normal[(i, j)] += inner(&down[i], &down[j]) * w;
            out.anomalous[(i, j)] += inner(&up[i], &down[j]) * w;
        }
    }
}

impl FockState {
    /// `Σₙ P(n) Πᵢ (1 − wᵢ)^{nᵢ} e^{−μᵢ}` over the modes with `off[i]`.
    pub fn no_click(&self, weights: &[f64], dark_means: &[f64], off: &[bool]) -> f64 {
        let mut e = 0.0;
        for (o, p) in &self.distribution {
            let mut f = *p;
            for i in 0..self.n_modes {
                if off[i] {
                    f *= (1.0 - weights[i]).powi(o[i] as i32);
                }
            }
            e += f;
        }
        let mu: f64 = (0..self.n_modes).filter(|&i| off[i]).map(|i| dark_means[i]).sum();
        e * (-mu).exp()
    }

    /// Probability that every mode with `on[i]` clicks, by direct summation.
    pub fn coincidence(&self, weights: &[f64], dark_means: &[f64], on: &[bool]) -> f64 {
        let mut total = 0.0;
        for (o, p) in &self.distribution {
            let mut f = *p;
            for i in 0..self.n_modes {
                if on[i] {
                    f *= 1.0 - (1.0 - weights[i]).powi(o[i] as i32) * (-dark_means[i]).exp();
                }
            }
            total += f;
        }
        total
    }

    pub fn moments(&self) -> (CMat, CMat) {
        (self.normal.clone(), self.anomalous.clone())
    }
}

/// 50:50 beamsplitter on modes `(i, j)` of an `n`-mode identity.
pub fn beamsplitter(n: usize, i: usize, j: usize) -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = CMat::identity(n, n);
    u[(i, i)] = C64::new(h, 0.0);
    u[(i, j)] = C64::new(h, 0.0);
    u[(j, i)] = C64::new(h, 0.0);
    u[(j, j)] = C64::new(-h, 0.0);
    u
}

//! Attenuator, amplifier and phase-conjugation channels in a truncated
//! number basis, plus the NOON / PNES robustness functionals.
//!
//! Every channel here maps `|m><n|` onto operators `|i><i - m + n|`, so
//! actions are stored as lists of `(i, coefficient)` images.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::gaussian::{noisy_decomposition, NoiseKind};
use crate::{ComplexMatrix, C64};

pub const DEFAULT_N_CUT: usize = 32;
pub const MAX_N_CUT: usize = 128;
pub const TAIL_TOL: f64 = 1e-8;

/// Truncation policy: starting dimension, tolerated tail mass, and the
/// ceiling for automatic doubling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    pub n_cut: usize,
    pub tail_tol: f64,
    pub max_n_cut: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { n_cut: DEFAULT_N_CUT, tail_tol: TAIL_TOL, max_n_cut: MAX_N_CUT }
    }
}

impl Truncation {
    pub fn with_n_cut(n_cut: usize) -> Self {
        Self { n_cut, max_n_cut: MAX_N_CUT.max(n_cut), ..Self::default() }
    }

    fn next(&self, n: usize) -> Option<usize> {
        (n < self.max_n_cut).then(|| (2 * n).min(self.max_n_cut))
    }
}

/// Table of `ln k!`.
#[derive(Clone, Debug)]
pub struct LnFactorial(Vec<f64>);

impl LnFactorial {
    pub fn new(n_max: usize) -> Self {
        let mut t = Vec::with_capacity(n_max + 1);
        t.push(0.0);
        for k in 1..=n_max {
            t.push(t[k - 1] + (k as f64).ln());
        }
        Self(t)
    }

    fn ensure(&mut self, n: usize) {
        while self.0.len() <= n {
            let k = self.0.len();
            let prev = self.0[k - 1];
            self.0.push(prev + (k as f64).ln());
        }
    }

    /// `ln C(n, k)`; `-inf` when `k > n`.
    pub fn ln_binomial(&mut self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.ensure(n);
        self.0[n] - self.0[k] - self.0[n - k]
    }
}

pub fn ln_binomial(n: usize, k: usize) -> f64 {
    LnFactorial::new(n).ln_binomial(n, k)
}

/// Single-mode operator on `|0>..|n_cut-1>` with a recorded bound on the
/// trace-norm mass lost to truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    mat: ComplexMatrix,
    tail: f64,
}

impl FockOperator {
    pub fn zeros(n_cut: usize) -> Self {
        Self { mat: ComplexMatrix::zeros(n_cut, n_cut), tail: 0.0 }
    }

    /// `|m><n|` in dimension `n_cut`.
    pub fn ket_bra(n_cut: usize, m: usize, n: usize) -> Result<Self> {
        if m >= n_cut || n >= n_cut {
            return Err(Error::DimensionMismatch(format!("|{m}><{n}| does not fit in n_cut = {n_cut}")));
        }
        let mut op = Self::zeros(n_cut);
        op.set(m, n, C64::new(1.0, 0.0));
        Ok(op)
    }

    pub fn from_matrix(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() || mat.rows() == 0 {
            return Err(Error::DimensionMismatch("Fock operators are square".into()));
        }
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { mat, tail: 0.0 })
    }

    pub fn n_cut(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.mat[(m, n)]
    }

    fn set(&mut self, m: usize, n: usize, v: C64) {
        self.mat[(m, n)] = v;
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Entrywise distance; refuses to compare different truncations.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.n_cut() != other.n_cut() {
            return Err(Error::DimensionMismatch(format!(
                "n_cut {} vs {}",
                self.n_cut(),
                other.n_cut()
            )));
        }
        Ok(self.mat.max_abs_diff(&other.mat))
    }

    /// Explicit change of truncation (padding with zeros or cutting).
    pub fn resized(&self, n_cut: usize) -> Self {
        let k = self.n_cut();
        let mat = ComplexMatrix::from_fn(n_cut, n_cut, |i, j| {
            if i < k && j < k { self.mat[(i, j)] } else { C64::new(0.0, 0.0) }
        });
        Self { mat, tail: self.tail }
    }

    fn nonzero(&self) -> Vec<(usize, usize, C64)> {
        let k = self.n_cut();
        let mut out = Vec::new();
        for m in 0..k {
            for n in 0..k {
                let v = self.mat[(m, n)];
                if v.norm() > 0.0 {
                    out.push((m, n, v));
                }
            }
        }
        out
    }
}

/// Single-mode channel realised through closed-form images of `|m><n|`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Stage {
    /// Quantum-limited attenuator, finite-rank images.
    Atten(f64),
    /// Quantum-limited amplifier, infinite-rank images.
    Amp(f64),
    /// Amplifier `k2` after attenuator `k1`, as one double sum.
    Noisy { k1: f64, k2: f64 },
}

impl Stage {
    /// Coefficients `c_i` with image `sum_i c_i |i><i - m + n|`, truncated to `i, i - m + n < n_out`.
    fn image(&self, lf: &mut LnFactorial, m: usize, n: usize, n_out: usize) -> Vec<(usize, f64)> {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        match *self {
            Stage::Atten(k) => {
                let loss = 1.0 - k * k;
                for l in 0..=m.min(n) {
                    let lb = 0.5 * (lf.ln_binomial(m, l) + lf.ln_binomial(n, l));
                    let c = lb.exp() * loss.powi(l as i32) * k.powi((m + n - 2 * l) as i32);
                    *acc.entry(m - l).or_default() += c;
                }
            }
            Stage::Amp(k) => {
                let pre = k.powi(-2 - (m + n) as i32);
                let gain = 1.0 - 1.0 / (k * k);
                let mut j = 0;
                while m.max(n) + j < n_out {
                    let lb = 0.5 * (lf.ln_binomial(m + j, j) + lf.ln_binomial(n + j, j));
                    *acc.entry(m + j).or_default() += pre * lb.exp() * gain.powi(j as i32);
                    j += 1;
                }
            }
            Stage::Noisy { k1, k2 } => {
                let pre = 1.0 / (k2 * k2);
                let ratio = k1 / k2;
                let gain = 1.0 - 1.0 / (k2 * k2);
                let loss = 1.0 - k1 * k1;
                for l in 0..=m.min(n) {
                    let lb_l = lf.ln_binomial(m, l) + lf.ln_binomial(n, l);
                    let base = pre * ratio.powi((m + n - 2 * l) as i32) * loss.powi(l as i32);
                    let mut j = 0;
                    while m.max(n) - l + j < n_out {
                        let lb = 0.5 * (lb_l + lf.ln_binomial(m - l + j, j) + lf.ln_binomial(n - l + j, j));
                        *acc.entry(m - l + j).or_default() += base * lb.exp() * gain.powi(j as i32);
                        j += 1;
                    }
                }
            }
        }
        acc.into_iter().filter(|(i, c)| *c != 0.0 && i + n < n_out + m).collect()
    }

    /// Mass of the image of `|m><m|` beyond `n_out`.
    fn diag_tail(&self, lf: &mut LnFactorial, m: usize, n_out: usize) -> f64 {
        match self {
            Stage::Atten(_) => 0.0,
            _ => {
                let kept: f64 = self.image(lf, m, m, n_out).iter().map(|(_, c)| c).sum();
                (1.0 - kept).max(0.0)
            }
        }
    }

    fn tail_bound(&self, lf: &mut LnFactorial, op: &[(usize, usize, C64)], n_out: usize) -> f64 {
        if matches!(self, Stage::Atten(_)) {
            return 0.0;
        }
        let mut cache: HashMap<usize, f64> = HashMap::new();
        let mut t = |lf: &mut LnFactorial, m: usize| *cache.entry(m).or_insert_with(|| self.diag_tail(lf, m, n_out));
        let mut s = 0.0;
        for &(m, n, v) in op {
            s += v.norm() * (t(lf, m) * t(lf, n)).sqrt();
        }
        s
    }

    fn apply(&self, op: &FockOperator, trunc: &Truncation) -> Result<FockOperator> {
        let entries = op.nonzero();
        let mut lf = LnFactorial::new(2 * trunc.max_n_cut.max(op.n_cut()) + 2);
        let mut n_out = op.n_cut().max(trunc.n_cut);
        let tail = loop {
            let t = self.tail_bound(&mut lf, &entries, n_out);
            if t <= trunc.tail_tol {
                break t;
            }
            match trunc.next(n_out) {
                Some(n) => n_out = n,
                None => return Err(Error::TruncationOverflow { tail: t, n_cut: n_out }),
            }
        };
        let mut data = vec![C64::new(0.0, 0.0); n_out * n_out];
        for (m, n, v) in entries {
            for (i, c) in self.image(&mut lf, m, n, n_out) {
                let j = i + n - m;
                data[i * n_out + j] += v * c;
            }
        }
        Ok(FockOperator {
            mat: ComplexMatrix::from_vec(n_out, n_out, data)?,
            tail: tail + op.tail,
        })
    }
}

fn quantum_limited_stage(kind: NoiseKind, kappa: f64) -> Result<Stage> {
    kind.check_kappa(kappa)?;
    Ok(match kind {
        NoiseKind::Attenuator => Stage::Atten(kappa),
        NoiseKind::Amplifier => Stage::Amp(kappa),
    })
}

fn noisy_stage(kind: NoiseKind, kappa: f64, a: f64) -> Result<Stage> {
    let (k1, k2) = noisy_decomposition(kind, kappa, a)?;
    Ok(Stage::Noisy { k1, k2 })
}

/// Quantum-limited `C1(kappa; 0)` or `C2(kappa; 0)` applied through the
/// closed-form images. The output dimension grows (by doubling) until the
/// amplifier tail bound is below `trunc.tail_tol`.
pub fn apply_quantum_limited(kind: NoiseKind, kappa: f64, op: &FockOperator, trunc: &Truncation) -> Result<FockOperator> {
    quantum_limited_stage(kind, kappa)?.apply(op, trunc)
}

/// Noisy `C1(kappa; a)` or `C2(kappa; a)` through the closed-form double sum.
pub fn apply_noisy(kind: NoiseKind, kappa: f64, a: f64, op: &FockOperator, trunc: &Truncation) -> Result<FockOperator> {
    noisy_stage(kind, kappa, a)?.apply(op, trunc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KrausKind {
    /// `B_l(kappa)`, `kappa <= 1`.
    Atten,
    /// `A_l(kappa)`, `kappa >= 1`.
    Amp,
    /// `T_l(kappa)`, phase conjugation, `kappa > 0`.
    Conj,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausFamily {
    pub kind: KrausKind,
    pub kappa: f64,
    pub ops: Vec<FockOperator>,
}

pub fn build_kraus(kind: KrausKind, kappa: f64, n_cut: usize, l_max: usize) -> Result<KrausFamily> {
    let ok = match kind {
        KrausKind::Atten => (0.0..=1.0).contains(&kappa),
        KrausKind::Amp => kappa >= 1.0 && kappa.is_finite(),
        KrausKind::Conj => kappa > 0.0 && kappa.is_finite(),
    };
    if !ok {
        return Err(Error::Domain(format!("kappa = {kappa} out of range for {kind:?}")));
    }
    if n_cut == 0 || l_max > n_cut {
        return Err(Error::Domain(format!("need 0 < n_cut and l_max <= n_cut (got {n_cut}, {l_max})")));
    }
    let mut lf = LnFactorial::new(2 * n_cut);
    let mut ops = Vec::with_capacity(l_max);
    for l in 0..l_max {
        let mut data = vec![C64::new(0.0, 0.0); n_cut * n_cut];
        match kind {
            KrausKind::Atten => {
                let s = (1.0 - kappa * kappa).sqrt().powi(l as i32);
                for m in 0..n_cut.saturating_sub(l) {
                    let v = (0.5 * lf.ln_binomial(m + l, l)).exp() * s * kappa.powi(m as i32);
                    data[m * n_cut + m + l] = C64::new(v, 0.0);
                }
            }
            KrausKind::Amp => {
                let s = (1.0 - 1.0 / (kappa * kappa)).sqrt().powi(l as i32);
                for m in 0..n_cut.saturating_sub(l) {
                    let v = (0.5 * lf.ln_binomial(m + l, l)).exp() * s * kappa.powi(-1 - m as i32);
                    data[(m + l) * n_cut + m] = C64::new(v, 0.0);
                }
            }
            KrausKind::Conj => {
                let k2 = kappa * kappa;
                for n in 0..=l.min(n_cut - 1) {
                    let row = l - n;
                    if row >= n_cut {
                        continue;
                    }
                    let ln = -0.5 * (n as f64 + 1.0) * (1.0 + k2).ln() - 0.5 * (row as f64) * (1.0 + 1.0 / k2).ln()
                        + 0.5 * lf.ln_binomial(l, n);
                    data[row * n_cut + n] = C64::new(ln.exp(), 0.0);
                }
            }
        }
        ops.push(FockOperator { mat: ComplexMatrix::from_vec(n_cut, n_cut, data)?, tail: 0.0 });
    }
    Ok(KrausFamily { kind, kappa, ops })
}

impl KrausFamily {
    pub fn n_cut(&self) -> usize {
        self.ops.first().map_or(0, FockOperator::n_cut)
    }

    /// Per level `m`: largest entry of row `m` of `sum K^dag K - I`.
    pub fn completeness_deficit(&self) -> Vec<f64> {
        let n = self.n_cut();
        let mut s = ComplexMatrix::zeros(n, n);
        for k in &self.ops {
            s = &s + &(&k.mat.adjoint() * &k.mat);
        }
        let d = &s - &ComplexMatrix::identity(n);
        (0..n).map(|m| (0..n).map(|j| d[(m, j)].norm()).fold(0.0, f64::max)).collect()
    }

    /// Builds the family with `n_cut` doubled from `trunc.n_cut` until the
    /// completeness deficit on levels `0..=levels` is below `trunc.tail_tol`.
    pub fn escalated(kind: KrausKind, kappa: f64, levels: usize, trunc: &Truncation) -> Result<Self> {
        let mut n = trunc.n_cut.max(levels + 1);
        loop {
            let fam = build_kraus(kind, kappa, n, n)?;
            let worst = fam.completeness_deficit()[..=levels].iter().copied().fold(0.0, f64::max);
            if worst <= trunc.tail_tol {
                return Ok(fam);
            }
            match trunc.next(n) {
                Some(next) => n = next,
                None => return Err(Error::TruncationOverflow { tail: worst, n_cut: n }),
            }
        }
    }
}

/// `sum_k K rho K^dag`.
pub fn apply_kraus(ops: &[FockOperator], rho: &FockOperator) -> Result<FockOperator> {
    let n = rho.n_cut();
    let mut out = ComplexMatrix::zeros(n, n);
    for k in ops {
        if k.n_cut() != n {
            return Err(Error::DimensionMismatch(format!("Kraus n_cut {} vs operator {}", k.n_cut(), n)));
        }
        out = &out + &(&(&k.mat * &rho.mat) * &k.mat.adjoint());
    }
    Ok(FockOperator { mat: out, tail: rho.tail })
}

/// Products `f1_i f2_j`: the set for `f1`'s channel applied after `f2`'s.
pub fn compose_kraus_products(f1: &KrausFamily, f2: &KrausFamily) -> Result<Vec<FockOperator>> {
    if f1.n_cut() != f2.n_cut() {
        return Err(Error::DimensionMismatch(format!("n_cut {} vs {}", f1.n_cut(), f2.n_cut())));
    }
    let mut out = Vec::with_capacity(f1.ops.len() * f2.ops.len());
    for a in &f1.ops {
        for b in &f2.ops {
            out.push(FockOperator { mat: &a.mat * &b.mat, tail: 0.0 });
        }
    }
    Ok(out)
}

/// The single-mode matrix elements that fix the 2x2-subspace determinants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobustnessElements {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
    pub x5: f64,
    pub n: usize,
    pub kappa: f64,
    pub a: f64,
}

pub fn robustness_elements(kind: NoiseKind, n: usize, kappa: f64, a: f64) -> Result<RobustnessElements> {
    if n == 0 {
        return Err(Error::Domain("photon number n must be >= 1".into()));
    }
    kind.check_kappa(kappa)?;
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("noise a = {a} must be finite and >= 0")));
    }
    let k2 = kappa * kappa;
    let big_k = match kind {
        NoiseKind::Attenuator => 1.0 + a / 2.0,
        NoiseKind::Amplifier => k2 + a / 2.0,
    };
    let inv = 1.0 / big_k;
    let u = 1.0 - k2 * inv;
    let v = 1.0 - inv;
    let ni = n as i32;
    let mut lf = LnFactorial::new(n);
    let x1 = inv
        * (0..=n)
            .map(|l| (2.0 * lf.ln_binomial(n, l)).exp() * (k2 * inv * inv).powi(l as i32) * (u * v).powi(ni - l as i32))
            .sum::<f64>();
    Ok(RobustnessElements {
        x1,
        x2: inv * u.powi(ni),
        x3: inv,
        x4: inv * v.powi(ni),
        x5: kappa.powi(ni) * inv.powi(ni + 1),
        n,
        kappa,
        a,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Probe {
    /// `(|n0> + |0n>)/sqrt 2`.
    Noon,
    /// `(|00> + |nn>)/sqrt 2`.
    Pnes,
}

impl Probe {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Noon => "noon",
            Self::Pnes => "pnes",
        }
    }
}

impl std::str::FromStr for Probe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noon" => Ok(Self::Noon),
            "pnes" => Ok(Self::Pnes),
            _ => Err(Error::Domain(format!("unknown probe state '{s}'"))),
        }
    }
}

/// The four functionals: NOON / PNES under attenuator (1, 2) or amplifier (3, 4).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Delta {
    D1,
    D2,
    D3,
    D4,
}

impl Delta {
    pub fn new(probe: Probe, kind: NoiseKind) -> Self {
        match (probe, kind) {
            (Probe::Noon, NoiseKind::Attenuator) => Self::D1,
            (Probe::Pnes, NoiseKind::Attenuator) => Self::D2,
            (Probe::Noon, NoiseKind::Amplifier) => Self::D3,
            (Probe::Pnes, NoiseKind::Amplifier) => Self::D4,
        }
    }

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::D1),
            2 => Ok(Self::D2),
            3 => Ok(Self::D3),
            4 => Ok(Self::D4),
            _ => Err(Error::Domain(format!("delta index {i} not in 1..=4"))),
        }
    }

    pub fn probe(&self) -> Probe {
        match self {
            Self::D1 | Self::D3 => Probe::Noon,
            Self::D2 | Self::D4 => Probe::Pnes,
        }
    }

    pub fn kind(&self) -> NoiseKind {
        match self {
            Self::D1 | Self::D2 => NoiseKind::Attenuator,
            Self::D3 | Self::D4 => NoiseKind::Amplifier,
        }
    }
}

/// Negative values certify NPT entanglement of the two-sided output.
pub fn delta(which: Delta, n: usize, kappa: f64, a: f64) -> Result<f64> {
    let x = robustness_elements(which.kind(), n, kappa, a)?;
    let coh = (x.x5 * x.x5 / 2.0).powi(2);
    Ok(match which.probe() {
        Probe::Noon => x.x1 * x.x2 * x.x3 * x.x4 - coh,
        Probe::Pnes => ((x.x1 * x.x2 + x.x3 * x.x4) / 2.0).powi(2) - coh,
    })
}

const CRIT_GRID: usize = 400;
const CRIT_TOL: f64 = 1e-10;

/// Noise `a_i(kappa)` at which the functional first turns nonnegative.
pub fn critical_noise(which: Delta, n: usize, kappa: f64) -> Result<f64> {
    let f = |a: f64| delta(which, n, kappa, a);
    if f(0.0)? >= 0.0 {
        return Err(Error::NoEntanglementAtZeroNoise);
    }
    let mut hi = 4.0f64.max(4.0 * kappa * kappa);
    for _ in 0..=3 {
        if let Some((lo, up)) = first_sign_change(&f, hi, CRIT_GRID)? {
            // a non-monotone stretch before the crossing gets a finer look
            let (lo, up) = if non_monotone(&f, 0.0, up, CRIT_GRID)? {
                first_sign_change(&f, up, 10 * CRIT_GRID)?.unwrap_or((lo, up))
            } else {
                (lo, up)
            };
            return bisect_sign(&f, lo, up);
        }
        hi *= 2.0;
    }
    Err(Error::NoSolution(format!("{which:?} stays negative up to a = {hi}")))
}

fn first_sign_change(f: &impl Fn(f64) -> Result<f64>, hi: f64, n: usize) -> Result<Option<(f64, f64)>> {
    let step = hi / n as f64;
    let mut prev = 0.0;
    for k in 1..=n {
        let a = step * k as f64;
        if f(a)? >= 0.0 {
            return Ok(Some((prev, a)));
        }
        prev = a;
    }
    Ok(None)
}

fn non_monotone(f: &impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, n: usize) -> Result<bool> {
    let step = (hi - lo) / n as f64;
    let mut prev = f(lo)?;
    for k in 1..=n {
        let v = f(lo + step * k as f64)?;
        if v < prev {
            return Ok(true);
        }
        prev = v;
    }
    Ok(false)
}

fn bisect_sign(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    while hi - lo > CRIT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TwoModeInput {
    Noon(usize),
    Pnes(usize),
    /// Two-mode squeezed vacuum with squeeze parameter `mu`.
    Tmsv(f64),
}

/// Sparse two-mode operator; key `(m1, n1, m2, n2)` holds the coefficient of
/// `|m1><n1| (x) |m2><n2|`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeOperator {
    n_cut: usize,
    entries: BTreeMap<(usize, usize, usize, usize), f64>,
    tail: f64,
}

impl TwoModeOperator {
    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `<m1 m2| rho |n1 n2>`.
    pub fn get(&self, m1: usize, m2: usize, n1: usize, n2: usize) -> f64 {
        self.entries.get(&(m1, n1, m2, n2)).copied().unwrap_or(0.0)
    }

    pub fn trace(&self) -> f64 {
        self.entries.iter().filter(|((a, b, c, d), _)| a == b && c == d).map(|(_, v)| v).sum()
    }

    /// Largest `|rho - rho^dag|` entry.
    pub fn hermitian_deviation(&self) -> f64 {
        self.entries
            .iter()
            .map(|(&(a, b, c, d), v)| (v - self.entries.get(&(b, a, d, c)).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }

    /// Restriction to the span of the listed product kets `|i j>`.
    pub fn project(&self, basis: &[(usize, usize)]) -> ComplexMatrix {
        ComplexMatrix::from_fn(basis.len(), basis.len(), |r, c| {
            let (m1, m2) = basis[r];
            let (n1, n2) = basis[c];
            C64::new(self.get(m1, m2, n1, n2), 0.0)
        })
    }

    /// `<a^dag a>` on the first mode.
    pub fn mean_photons_a(&self) -> f64 {
        self.entries
            .iter()
            .filter(|((m1, n1, m2, n2), _)| m1 == n1 && m2 == n2)
            .map(|((m1, ..), v)| *m1 as f64 * v)
            .sum()
    }

    /// `<a b>` (annihilators on both modes).
    pub fn ab_correlator(&self) -> f64 {
        self.entries
            .iter()
            .filter(|((m1, n1, m2, n2), _)| *n1 == m1 + 1 && *n2 == m2 + 1)
            .map(|((_, n1, _, n2), v)| ((*n1 * *n2) as f64).sqrt() * v)
            .sum()
    }

    fn input(state: TwoModeInput, n_cut: usize) -> Result<Self> {
        let mut e = BTreeMap::new();
        let mut tail = 0.0;
        match state {
            TwoModeInput::Noon(n) | TwoModeInput::Pnes(n) => {
                if n == 0 || n_cut < 2 * n + 4 {
                    return Err(Error::Domain(format!("need n >= 1 and n_cut >= 2n + 4 (n = {n}, n_cut = {n_cut})")));
                }
                let pairs: [(usize, usize); 2] = if matches!(state, TwoModeInput::Noon(_)) { [(n, 0), (0, n)] } else { [(0, 0), (n, n)] };
                for &(a1, a2) in &pairs {
                    for &(b1, b2) in &pairs {
                        e.insert((a1, b1, a2, b2), 0.5);
                    }
                }
            }
            TwoModeInput::Tmsv(mu) => {
                if !(mu >= 0.0 && mu.is_finite()) {
                    return Err(Error::Domain(format!("squeeze mu = {mu} must be >= 0")));
                }
                let t = mu.tanh();
                let c0 = 1.0 / mu.cosh();
                let amp: Vec<f64> = (0..n_cut).map(|k| c0 * t.powi(k as i32)).collect();
                for k in 0..n_cut {
                    for l in 0..n_cut {
                        let v = amp[k] * amp[l];
                        if v != 0.0 {
                            e.insert((k, l, k, l), v);
                        }
                    }
                }
                tail = t.powi(2 * n_cut as i32);
            }
        }
        Ok(Self { n_cut, entries: e, tail })
    }

    fn apply_stage(&self, stage: &Stage, mode: usize, lf: &mut LnFactorial, n_out: usize) -> Self {
        let mut cache: HashMap<(usize, usize), Vec<(usize, f64)>> = HashMap::new();
        let mut out: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();
        for (&(m1, n1, m2, n2), &v) in &self.entries {
            let (m, n) = if mode == 0 { (m1, n1) } else { (m2, n2) };
            let img = cache.entry((m, n)).or_insert_with(|| stage.image(lf, m, n, n_out));
            for &(i, c) in img.iter() {
                let j = i + n - m;
                let key = if mode == 0 { (i, j, m2, n2) } else { (m1, n1, i, j) };
                *out.entry(key).or_default() += v * c;
            }
        }
        Self { n_cut: n_out, entries: out, tail: self.tail }
    }
}

/// Symmetric two-sided action of the noisy channel `(kind, kappa, a)`.
/// The truncation is doubled until the lost trace is below `trunc.tail_tol`.
pub fn evolve_two_sided(state: TwoModeInput, kind: NoiseKind, kappa: f64, a: f64, trunc: &Truncation) -> Result<TwoModeOperator> {
    let stage = noisy_stage(kind, kappa, a)?;
    let mut n_cut = trunc.n_cut;
    let mut lf = LnFactorial::new(2 * trunc.max_n_cut + 2);
    loop {
        let input = TwoModeOperator::input(state, n_cut)?;
        let t_in = input.trace();
        let mut out = input.apply_stage(&stage, 0, &mut lf, n_cut).apply_stage(&stage, 1, &mut lf, n_cut);
        let lost = (t_in - out.trace()).max(0.0) + input.tail;
        out.tail = lost;
        if lost <= trunc.tail_tol {
            return Ok(out);
        }
        match trunc.next(n_cut) {
            Some(n) => n_cut = n,
            None => return Err(Error::TruncationOverflow { tail: lost, n_cut }),
        }
    }
}

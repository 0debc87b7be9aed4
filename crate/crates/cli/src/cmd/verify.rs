use clap::{Args, ValueEnum};
use qcorr::ellipsoid::{brute_force_sa_min, correlations};
use qcorr::fock::{apply_quantum_limited, build_kraus, FockOperator, KrausFamily, KrausKind, Truncation};
use qcorr::gaussian::{GaussianChannel, Mat2, NoiseKind};
use qcorr::mueller::XStateCanonical;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Output;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::table::{Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Kraus,
    Semigroup,
    NbEb,
    DiscordOracle,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    pub suite: Suite,
    /// Sample count for the sampled suites (defaults: nb-eb 100000, discord-oracle 200, semigroup 40).
    #[arg(long)]
    pub samples: Option<usize>,
}

struct Check {
    suite: &'static str,
    property: &'static str,
    samples: usize,
    failures: usize,
    worst: f64,
    tol: f64,
}

impl Check {
    fn new(suite: &'static str, property: &'static str, tol: f64) -> Self {
        Check { suite, property, samples: 0, failures: 0, worst: 0.0, tol }
    }

    fn record(&mut self, err: f64) {
        self.samples += 1;
        if err.is_nan() || err >= self.tol {
            self.failures += 1;
        }
        self.worst = if err.is_nan() { f64::NAN } else { self.worst.max(err) };
    }

    fn flag(&mut self, ok: bool) {
        self.record(if ok { 0.0 } else { 1.0 });
    }
}

fn kraus(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, CliError> {
    let n = cfg.n_cut;
    let mut att = Check::new("kraus", "attenuator completeness on [0, ncut)", 1e-12);
    for _ in 0..8 {
        let k = rng.gen_range(0.05..1.0);
        let f = build_kraus(KrausKind::Atten, k, n, n)?;
        att.record(f.completeness_deficit().into_iter().fold(0.0, f64::max));
    }
    let mut amp = Check::new("kraus", "amplifier completeness on levels <= ncut/2", 1e-8);
    let levels = n / 2;
    for _ in 0..8 {
        let k = rng.gen_range(1.01..1.6);
        let f = KrausFamily::escalated(KrausKind::Amp, k, levels, &Truncation::with_n_cut(n))?;
        amp.record(f.completeness_deficit()[..=levels].iter().copied().fold(0.0, f64::max));
    }
    Ok(vec![att, amp])
}

fn semigroup(cfg: &RunConfig, rng: &mut ChaCha8Rng, samples: usize) -> Result<Vec<Check>, CliError> {
    let n = cfg.n_cut;
    let t = Truncation::with_n_cut(n);
    let top = n / 2;
    let mut checks = [
        Check::new("semigroup", "attenuator C(k1) C(k2) = C(k1 k2)", 1e-10),
        Check::new("semigroup", "amplifier C(k1) C(k2) = C(k1 k2)", 1e-10),
    ];
    for _ in 0..samples {
        let r = rng.gen_range(0..=top);
        let d = rng.gen_range(0..=top - r);
        let op = FockOperator::ket_bra(n, r, r + d)?;
        for (c, kind, lo, hi) in [(0, NoiseKind::Attenuator, 0.3, 1.0), (1, NoiseKind::Amplifier, 1.0, 1.25)] {
            let (k1, k2): (f64, f64) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
            let seq = apply_quantum_limited(kind, k1, &apply_quantum_limited(kind, k2, &op, &t)?, &t)?;
            let one = apply_quantum_limited(kind, k1 * k2, &op, &t)?;
            checks[c].record(seq.resized(n).max_abs_diff(&one.resized(n))?);
        }
    }
    Ok(checks.into())
}

fn random_channel(rng: &mut ChaCha8Rng) -> Result<GaussianChannel, CliError> {
    let k: f64 = rng.gen_range(1e-9..=2.0);
    let (a, b) = (rng.gen_range(1e-9..=4.0), rng.gen_range(1e-9..=4.0));
    let x = match rng.gen_range(0..3) {
        0 => Mat2::identity() * k,
        1 => Mat2::new(k, 0.0, 0.0, -k),
        _ => Mat2::new(1.0, 0.0, 0.0, 0.0),
    };
    let (s, c) = rng.gen_range(0.0..std::f64::consts::PI).sin_cos();
    let r = Mat2::new(c, -s, s, c);
    Ok(GaussianChannel::unchecked(x, r * Mat2::new(a, 0.0, 0.0, b) * r.transpose())?)
}

fn nb_eb(rng: &mut ChaCha8Rng, samples: usize) -> Result<Vec<Check>, CliError> {
    let mut c = Check::new("nb-eb", "NB implies EB over CP channels", 0.5);
    for _ in 0..samples {
        let ch = random_channel(rng)?;
        if ch.is_cp() {
            c.flag(!ch.is_nb()? || ch.is_eb()?);
        }
    }
    Ok(vec![c])
}

fn random_x(rng: &mut ChaCha8Rng) -> XStateCanonical {
    let w: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.02..1.0));
    let s: f64 = w.iter().sum();
    let p = w.map(|v| v / s);
    let r03 = rng.gen_range(-1.0..1.0) * (p[0] * p[3]).sqrt();
    let r12 = rng.gen_range(-1.0..1.0) * (p[1] * p[2]).sqrt();
    XStateCanonical::from_entries(p, r03, r12)
}

fn discord_oracle(rng: &mut ChaCha8Rng, samples: usize) -> Result<Vec<Check>, CliError> {
    let states: Vec<XStateCanonical> = (0..samples).map(|_| random_x(rng)).collect();
    let errs: Vec<f64> = states
        .par_iter()
        .map(|x| correlations(x).map(|c| (c.sa_min - brute_force_sa_min(x, 400)).abs()).unwrap_or(f64::NAN))
        .collect();
    let mut c = Check::new("discord-oracle", "|SA_min - grid minimum|", 1e-4);
    errs.into_iter().for_each(|e| c.record(e));
    Ok(vec![c])
}

pub fn run(args: &VerifyArgs, cfg: &RunConfig) -> Result<Output, CliError> {
    let want = |s: Suite| args.suite == s || args.suite == Suite::All;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();
    if want(Suite::Kraus) {
        checks.extend(kraus(cfg, &mut rng)?);
    }
    if want(Suite::Semigroup) {
        checks.extend(semigroup(cfg, &mut rng, args.samples.unwrap_or(40))?);
    }
    if want(Suite::NbEb) {
        checks.extend(nb_eb(&mut rng, args.samples.unwrap_or(100_000))?);
    }
    if want(Suite::DiscordOracle) {
        checks.extend(discord_oracle(&mut rng, args.samples.unwrap_or(200))?);
    }
    let mut t = Table::new("verify", &["suite", "property", "samples", "failures", "worst_error", "tolerance", "pass"]);
    t.note(format!("seed = {}, ncut = {}", cfg.seed, cfg.n_cut));
    let mut failed = false;
    for c in &checks {
        let pass = c.failures == 0;
        failed |= !pass;
        t.push(vec![
            c.suite.into(),
            c.property.into(),
            c.samples.into(),
            c.failures.into(),
            Cell::Sci(c.worst),
            Cell::Sci(c.tol),
            pass.into(),
        ]);
    }
    Ok(Output { table: t, failed })
}

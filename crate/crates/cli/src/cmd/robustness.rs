use clap::{Args, ValueEnum};
use qcorr::fock::{critical_noise, Delta, Probe};
use qcorr::gaussian::{gaussian_critical_noise, NoiseKind};
use rayon::prelude::*;

use super::{Grid, Output};
use crate::error::CliError;
use crate::table::{Cell, Table};

pub const MAX_N: usize = 10;
/// Squeezing of the Gaussian comparison state with the same mean photon number as NOON n = 5.
pub const MU1: f64 = 0.5185;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StateArg {
    Noon,
    Pnes,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ChannelArg {
    Atten,
    Amp,
}

#[derive(Args, Debug)]
pub struct RobustnessArgs {
    #[arg(long, value_enum)]
    pub state: StateArg,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub channel: ChannelArg,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Squeeze parameter of the Gaussian reference curve g1.
    #[arg(long, default_value_t = MU1)]
    pub mu1: f64,
}

pub fn run(args: &RobustnessArgs) -> Result<Output, CliError> {
    if args.n == 0 || args.n > MAX_N {
        return Err(CliError::Usage(format!("n must lie in 1..={MAX_N}")));
    }
    if !(args.mu1.is_finite() && args.mu1 >= 0.0) {
        return Err(CliError::Usage("mu1 must be finite and >= 0".into()));
    }
    let (probe, kind) = (
        match args.state {
            StateArg::Noon => Probe::Noon,
            StateArg::Pnes => Probe::Pnes,
        },
        match args.channel {
            ChannelArg::Atten => NoiseKind::Attenuator,
            ChannelArg::Amp => NoiseKind::Amplifier,
        },
    );
    let (df, dt) = match kind {
        NoiseKind::Attenuator => (0.01, 1.0),
        NoiseKind::Amplifier => (1.0, 2.0),
    };
    let g = Grid::new(args.from.unwrap_or(df), args.to.unwrap_or(dt), args.points)?;
    for k in [g.from, g.to] {
        kind.check_kappa(k)?;
    }
    let which = Delta::new(probe, kind);
    let mut t = Table::new("robustness", &["kappa", "a_crit", "g1", "g_inf", "region_r"]);
    t.note(format!("state = {} n = {}, channel = {}", probe.name(), args.n, kind.name()));
    t.note(format!("g1: two-mode squeezed vacuum threshold at mu1 = {}; g_inf: mu -> infinity", args.mu1));
    t.note("region_r: a_crit above g_inf");
    t.note(g.describe("kappa"));
    t.rows = g
        .values()
        .into_par_iter()
        .map(|k| {
            let a = critical_noise(which, args.n, k).ok();
            let g1 = gaussian_critical_noise(kind, k, args.mu1).ok();
            let ginf = gaussian_critical_noise(kind, k, f64::INFINITY).ok();
            let region = matches!((a, ginf), (Some(a), Some(gi)) if a > gi);
            vec![k.into(), a.into(), g1.into(), ginf.into(), Cell::Bool(region)]
        })
        .collect();
    Ok(t.into())
}

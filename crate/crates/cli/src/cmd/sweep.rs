use std::f64::consts::FRAC_PI_2;

use clap::{Args, ValueEnum};
use qcorr::ellipsoid::{
    boundary_ax_h, boundary_ax_v, cond_entropy_z, correlations_of_ellipsoid, derivative_g, vn_entropy_theta,
    CorrelationEllipsoid,
};
use qcorr::mueller::{xstate_positivity, XStateCanonical};
use rayon::prelude::*;

use super::{parse_reals, Grid, Output};
use crate::error::CliError;
use crate::table::{Cell, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Curve {
    /// a_x^V and a_x^H against a_z at fixed z_c.
    WedgeBoundaries,
    /// Correlations against a_x at fixed (a_y, a_z, z_c, z_I).
    DiscordVsAx,
    /// Correlations against z_I at fixed shape.
    DiscordVsZi,
    /// S^A(z) and G(z) across the ellipsoid.
    SaVsZ,
    /// Von Neumann conditional entropy against measurement angle for an X-state.
    VnVsTheta,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub curve: Curve,
    #[arg(long, allow_hyphen_values = true)]
    pub ax: Option<f64>,
    /// Defaults to a_x.
    #[arg(long, allow_hyphen_values = true)]
    pub ay: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub az: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub zc: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub zi: Option<f64>,
    /// Sign of det M restricted to the correlation block.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub sign: i8,
    /// X parameters m11,m22,m33,m03,m30 (vn-vs-theta).
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

fn need(v: Option<f64>, name: &str, curve: &str) -> Result<f64, CliError> {
    v.filter(|x| x.is_finite()).ok_or_else(|| CliError::Usage(format!("{curve} needs --{name}")))
}

fn grid(args: &SweepArgs, default: Option<(f64, f64)>, curve: &str) -> Result<Grid, CliError> {
    let (from, to) = match (args.from, args.to, default) {
        (Some(f), Some(t), _) => (f, t),
        (f, t, Some((df, dt))) => (f.unwrap_or(df), t.unwrap_or(dt)),
        _ => return Err(CliError::Usage(format!("{curve} needs --from and --to"))),
    };
    Grid::new(from, to, args.points)
}

fn corr_row(e: qcorr::Result<CorrelationEllipsoid>) -> Vec<Cell> {
    match e.and_then(|e| correlations_of_ellipsoid(&e)) {
        Ok(c) => vec![
            true.into(),
            c.discord.into(),
            c.classical.into(),
            c.mutual.into(),
            c.sa_min.into(),
            c.measurement.kind.name().into(),
            c.measurement.z0.into(),
        ],
        Err(_) => {
            let mut r = vec![false.into()];
            r.extend(std::iter::repeat_n(Cell::Empty, 6));
            r
        }
    }
}

const CORR_COLS: [&str; 7] = ["valid", "discord", "classical", "mutual", "sa_min", "measurement", "z0"];

fn with_lead(lead: &str, rest: &[&str]) -> Vec<String> {
    std::iter::once(lead).chain(rest.iter().copied()).map(String::from).collect()
}

pub fn run(args: &SweepArgs) -> Result<Output, CliError> {
    let name = args.curve.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default();
    if args.sign != 1 && args.sign != -1 {
        return Err(CliError::Usage("--sign must be 1 or -1".into()));
    }
    let mut t = Table { command: format!("sweep {name}"), ..Table::default() };
    let rows: Vec<Vec<Cell>> = match args.curve {
        Curve::WedgeBoundaries => {
            let zc = need(args.zc, "zc", &name)?;
            let g = grid(args, Some((0.01, 1.0 - zc.abs())), &name)?;
            t.columns = with_lead("a_z", &["ax_v", "ax_h"]);
            t.note(format!("z_c = {zc}"));
            t.note(g.describe("a_z"));
            g.values()
                .into_par_iter()
                .map(|az| vec![az.into(), boundary_ax_v(az, zc).ok().into(), boundary_ax_h(az, zc).ok().into()])
                .collect()
        }
        Curve::DiscordVsAx => {
            let (az, zc, zi) = (need(args.az, "az", &name)?, need(args.zc, "zc", &name)?, need(args.zi, "zi", &name)?);
            let g = grid(args, None, &name)?;
            t.columns = with_lead("a_x", &CORR_COLS);
            let ay = args.ay.map_or("a_x".to_owned(), |v| v.to_string());
            t.note(format!("a_y = {ay}, a_z = {az}, z_c = {zc}, z_I = {zi}, sign = {}", args.sign));
            t.note(g.describe("a_x"));
            g.values()
                .into_par_iter()
                .map(|ax| {
                    let mut r = vec![ax.into()];
                    r.extend(corr_row(CorrelationEllipsoid::new(ax, args.ay.unwrap_or(ax), az, zc, zi, args.sign)));
                    r
                })
                .collect()
        }
        Curve::DiscordVsZi => {
            let (ax, az, zc) = (need(args.ax, "ax", &name)?, need(args.az, "az", &name)?, need(args.zc, "zc", &name)?);
            let g = grid(args, None, &name)?;
            t.columns = with_lead("z_i", &CORR_COLS);
            let ay = args.ay.unwrap_or(ax);
            t.note(format!("a_x = {ax}, a_y = {ay}, a_z = {az}, z_c = {zc}, sign = {}", args.sign));
            t.note(g.describe("z_I"));
            g.values()
                .into_par_iter()
                .map(|zi| {
                    let mut r = vec![zi.into()];
                    r.extend(corr_row(CorrelationEllipsoid::new(ax, ay, az, zc, zi, args.sign)));
                    r
                })
                .collect()
        }
        Curve::SaVsZ => {
            let (ax, az, zc) = (need(args.ax, "ax", &name)?, need(args.az, "az", &name)?, need(args.zc, "zc", &name)?);
            let zi = args.zi.unwrap_or(zc);
            let ay = args.ay.unwrap_or(ax);
            let e = CorrelationEllipsoid::new(ax, ay, az, zc, zi, args.sign)?;
            let g = grid(args, Some((e.z_bottom(), e.z_i.min(e.z_top()))), &name)?;
            t.columns = with_lead("z", &["sa", "g"]);
            t.note(format!("a_x = {ax}, a_y = {ay}, a_z = {az}, z_c = {zc}, z_I = {zi}"));
            t.note("sa: three-element scheme with its lower pair at height z; g: sign of dS^A/dz");
            t.note(g.describe("z"));
            g.values()
                .into_par_iter()
                .map(|z| vec![z.into(), cond_entropy_z(&e, z).ok().into(), derivative_g(&e, z).ok().into()])
                .collect()
        }
        Curve::VnVsTheta => {
            let v = parse_reals(
                args.x.as_deref().ok_or_else(|| CliError::Usage(format!("{name} needs --x")))?,
                5,
                "x",
            )?;
            let x = XStateCanonical::new(v[0], v[1], v[2], v[3], v[4]);
            if !xstate_positivity(&x) {
                return Err(qcorr::Error::NotPhysical("X parameters give a non-positive density matrix".into()).into());
            }
            let g = grid(args, Some((0.0, FRAC_PI_2)), &name)?;
            t.columns = with_lead("theta", &["sa_vn"]);
            t.note(format!("x = ({}, {}, {}, {}, {})", v[0], v[1], v[2], v[3], v[4]));
            t.note(g.describe("theta"));
            g.values().into_par_iter().map(|th| vec![th.into(), vn_entropy_theta(&x, th).into()]).collect()
        }
    };
    t.rows = rows;
    Ok(t.into())
}

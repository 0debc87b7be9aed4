use clap::{ArgGroup, Args, ValueEnum};
use qcorr::ellipsoid::{
    correlations_measuring, correlations_of_ellipsoid, ellipsoid_from_x, ellipsoid_separable, CorrelationEllipsoid,
    Correlations,
};
use qcorr::linalg::{ppt_entangled, DensityMatrix, Subsystem};
use qcorr::mueller::{xstate_canonical, xstate_positivity, XStateCanonical};
use qcorr::{ComplexMatrix, C64 as Complex64};

use super::{parse_reals, Output};
use crate::error::CliError;
use crate::table::{Cell, Table};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Side {
    A,
    B,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("state").required(true).args(["x", "rho", "ellipsoid"])))]
pub struct DiscordArgs {
    /// Canonical X parameters m11,m22,m33,m03,m30.
    #[arg(long, value_name = "M11,M22,M33,M03,M30", allow_hyphen_values = true)]
    pub x: Option<String>,
    /// 16 row-major density-matrix entries, each `re` or `re:im`.
    #[arg(long, value_name = "ENTRIES", allow_hyphen_values = true)]
    pub rho: Option<String>,
    /// Ellipsoid a_x,a_y,a_z,z_c,z_I,sign (sign = +1 or -1).
    #[arg(long, value_name = "AX,AY,AZ,ZC,ZI,SIGN", allow_hyphen_values = true)]
    pub ellipsoid: Option<String>,
    /// Subsystem that is measured.
    #[arg(long, value_enum, default_value = "b")]
    pub measure: Side,
}

fn parse_rho(s: &str) -> Result<ComplexMatrix, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 16 {
        return Err(CliError::Usage(format!("rho: expected 16 entries, got {}", parts.len())));
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("rho: cannot parse {t:?}")));
    let data = parts
        .iter()
        .map(|p| match p.split_once(':') {
            Some((re, im)) => Ok(Complex64::new(num(re)?, num(im)?)),
            None => Ok(Complex64::new(num(p)?, 0.0)),
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(ComplexMatrix::from_vec(4, 4, data)?)
}

const COLUMNS: [&str; 18] = [
    "input",
    "measured",
    "discord",
    "classical",
    "mutual",
    "sa_min",
    "measurement",
    "theta",
    "z0",
    "a_x",
    "a_y",
    "a_z",
    "z_c",
    "z_i",
    "det_sign",
    "ppt_entangled",
    "ppt_min_eigenvalue",
    "ellipsoid_separable",
];

pub fn run(args: &DiscordArgs) -> Result<Output, CliError> {
    let side = match args.measure {
        Side::A => Subsystem::A,
        Side::B => Subsystem::B,
    };
    let (input, x, corr, ellipsoid) = if let Some(s) = &args.ellipsoid {
        let v = parse_reals(s, 6, "ellipsoid")?;
        let sign = match v[5] {
            1.0 => 1,
            -1.0 => -1,
            s => return Err(CliError::Usage(format!("ellipsoid sign must be +1 or -1, got {s}"))),
        };
        if matches!(side, Subsystem::A) {
            return Err(CliError::Usage("ellipsoid input describes measurements on B only".into()));
        }
        let e = CorrelationEllipsoid::new(v[0], v[1], v[2], v[3], v[4], sign)?;
        let corr = correlations_of_ellipsoid(&e)?;
        let x = qcorr::ellipsoid::x_from_ellipsoid(&e)?;
        ("ellipsoid", x, corr, Some(e))
    } else {
        let x = if let Some(s) = &args.x {
            let v = parse_reals(s, 5, "x")?;
            let x = XStateCanonical::new(v[0], v[1], v[2], v[3], v[4]);
            if !xstate_positivity(&x) {
                return Err(qcorr::Error::NotPhysical("X parameters give a non-positive density matrix".into()).into());
            }
            x
        } else {
            let rho = DensityMatrix::new(parse_rho(args.rho.as_deref().unwrap_or_default())?)?;
            xstate_canonical(&rho)?.state
        };
        let corr: Correlations = correlations_measuring(&x, side)?;
        let e = match side {
            Subsystem::B => ellipsoid_from_x(&x).ok(),
            Subsystem::A => ellipsoid_from_x(&x.swapped()).ok(),
        };
        (if args.x.is_some() { "x" } else { "rho" }, x, corr, e)
    };
    let ppt = ppt_entangled(&x.to_rho()?)?;
    let m = &corr.measurement;
    let mut t = Table::new("discord", &COLUMNS);
    t.note("entropies in bits; ellipsoid columns refer to the measured side");
    let [ex, ey, ez, ec, ei, es, sep]: [Cell; 7] = match &ellipsoid {
        Some(e) => [
            e.a_x.into(),
            e.a_y.into(),
            e.a_z.into(),
            e.z_c.into(),
            e.z_i.into(),
            i64::from(e.det_sign).into(),
            ellipsoid_separable(e).into(),
        ],
        None => std::array::from_fn(|_| Cell::Empty),
    };
    t.push(vec![
        input.into(),
        match side {
            Subsystem::A => "a",
            Subsystem::B => "b",
        }
        .into(),
        corr.discord.into(),
        corr.classical.into(),
        corr.mutual.into(),
        corr.sa_min.into(),
        m.kind.name().into(),
        m.theta.into(),
        m.z0.into(),
        ex,
        ey,
        ez,
        ec,
        ei,
        es,
        ppt.entangled.into(),
        ppt.min_eigenvalue.into(),
        sep,
    ]);
    Ok(t.into())
}

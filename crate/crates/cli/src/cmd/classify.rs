use clap::Args;
use qcorr::gaussian::{find_squeeze, GaussianChannel, Mat2, NcForm};

use super::{parse_reals, Output};
use crate::error::CliError;
use crate::table::{Cell, Table};

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// X matrix, row-major x00,x01,x10,x11.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    /// Y matrix, row-major y00,y01,y10,y11 (symmetric).
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
}

const COLUMNS: [&str; 15] = [
    "cp",
    "eb",
    "nb",
    "det_x",
    "holevo_class",
    "kappa",
    "noise",
    "nc_form",
    "nc_kappa",
    "nc_a",
    "nc_b",
    "y_eig_max",
    "y_eig_min",
    "r0",
    "squeeze_orientation",
];

pub fn run(args: &ClassifyArgs) -> Result<Output, CliError> {
    let x = parse_reals(&args.x, 4, "x")?;
    let y = parse_reals(&args.y, 4, "y")?;
    let ch = GaussianChannel::unchecked(Mat2::new(x[0], x[1], x[2], x[3]), Mat2::new(y[0], y[1], y[2], y[3]))?;
    let cp = ch.is_cp();
    let (ya, yb) = ch.y_eigenvalues();
    let mut t = Table::new("classify-gaussian", &COLUMNS);
    t.note("vacuum variance 1; noise is sqrt(det Y) above the quantum-limited value");
    let (eb, nb): (Cell, Cell) = if cp {
        (ch.is_eb()?.into(), ch.is_nb()?.into())
    } else {
        (Cell::Empty, Cell::Empty)
    };
    let holevo = ch.canonical_class();
    let (nck, nca, ncb) = match ch.nc_canonical_form() {
        NcForm::PositiveDet { kappa, a, b } | NcForm::NegativeDet { kappa, a, b } => (Some(kappa), a, b),
        NcForm::SingularX { a, b } => (None, a, b),
    };
    let squeeze = if cp && ch.is_eb()? { find_squeeze(&ch).ok() } else { None };
    let (class, kappa, noise): (Cell, Cell, Cell) = if cp {
        (holevo.tag.name().into(), holevo.kappa.into(), holevo.noise.into())
    } else {
        (Cell::Empty, Cell::Empty, Cell::Empty)
    };
    t.push(vec![
        cp.into(),
        eb,
        nb,
        ch.det_x().into(),
        class,
        kappa,
        noise,
        ch.nc_canonical_form().name().into(),
        nck.into(),
        nca.into(),
        ncb.into(),
        ya.into(),
        yb.into(),
        squeeze.map(|p| p.r0).into(),
        squeeze.map_or(Cell::Empty, |p| i64::from(p.orientation).into()),
    ]);
    Ok(t.into())
}

pub mod classify;
pub mod discord;
pub mod robustness;
pub mod sweep;
pub mod verify;

use crate::error::CliError;
use crate::table::Table;

/// Grids larger than this are rejected before any work starts.
pub const MAX_GRID: usize = 1_000_000;

pub struct Output {
    pub table: Table,
    /// Set by property suites; maps to exit code 1.
    pub failed: bool,
}

impl From<Table> for Output {
    fn from(table: Table) -> Self {
        Output { table, failed: false }
    }
}

pub fn parse_reals(s: &str, want: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("{what}: cannot parse {t:?}"))))
        .collect::<Result<_, _>>()?;
    if v.len() != want {
        return Err(CliError::Usage(format!("{what}: expected {want} comma-separated values, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Usage(format!("{what}: values must be finite")));
    }
    Ok(v)
}

/// Inclusive uniform grid `from..=to` with `points` samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(from: f64, to: f64, points: usize) -> Result<Self, CliError> {
        if !(from.is_finite() && to.is_finite()) {
            return Err(CliError::Usage("grid bounds must be finite".into()));
        }
        if points == 0 || points > MAX_GRID {
            return Err(CliError::Usage(format!("grid needs 1..={MAX_GRID} points, got {points}")));
        }
        if points > 1 && from >= to {
            return Err(CliError::Usage(format!("grid needs from < to, got [{from}, {to}]")));
        }
        Ok(Self { from, to, points })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.points - 1) as f64;
        (0..self.points).map(|i| if i + 1 == self.points { self.to } else { self.from + step * i as f64 }).collect()
    }

    pub fn describe(&self, var: &str) -> String {
        format!("grid: {var} in [{}, {}], {} points", self.from, self.to, self.points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_exact() {
        let g = Grid::new(0.1, 0.7, 7).unwrap().values();
        assert_eq!(g.len(), 7);
        assert_eq!((g[0], g[6]), (0.1, 0.7));
        assert!(Grid::new(1.0, 0.0, 3).is_err());
        assert!(Grid::new(0.0, 1.0, MAX_GRID + 1).is_err());
        assert_eq!(Grid::new(0.3, 0.3, 1).unwrap().values(), vec![0.3]);
    }

    #[test]
    fn reals() {
        assert_eq!(parse_reals("1, 2.5", 2, "t").unwrap(), vec![1.0, 2.5]);
        assert!(parse_reals("1,2", 3, "t").is_err());
        assert!(parse_reals("1,x", 2, "t").is_err());
        assert!(parse_reals("1,inf", 2, "t").is_err());
    }
}

//! Run-wide settings: built-in defaults, then an optional `key = value`
//! file, then command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(CliError::Usage(format!("format must be json or csv, got {s:?}"))),
        }
    }
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

pub const MAX_PRECISION: usize = 17;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub format: Format,
    pub precision: usize,
    pub seed: u64,
    pub n_cut: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { format: Format::Csv, precision: 9, seed: 20240521, n_cut: qcorr::fock::DEFAULT_N_CUT, out: None }
    }
}

/// Values supplied on the command line; `None` leaves the lower layer alone.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub format: Option<Format>,
    pub precision: Option<usize>,
    pub seed: Option<u64>,
    pub n_cut: Option<usize>,
    pub out: Option<PathBuf>,
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Usage(format!("bad value for {key}: {v:?}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "format" => self.format = value.parse()?,
            "precision" => self.precision = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "ncut" => self.n_cut = parse(key, value)?,
            "out" => self.out = if value.is_empty() || value == "-" { None } else { Some(PathBuf::from(value)) },
            _ => return Err(CliError::Usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn load(file: Option<&Path>, flags: &Overrides) -> Result<Self, CliError> {
        let mut c = Self::default();
        if let Some(p) = file {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            c.apply_text(&text)?;
        }
        if let Some(f) = flags.format {
            c.format = f;
        }
        if let Some(p) = flags.precision {
            c.precision = p;
        }
        if let Some(s) = flags.seed {
            c.seed = s;
        }
        if let Some(n) = flags.n_cut {
            c.n_cut = n;
        }
        if let Some(o) = &flags.out {
            c.out = Some(o.clone());
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.precision > MAX_PRECISION {
            return Err(CliError::Usage(format!("precision must be at most {MAX_PRECISION}")));
        }
        if !(2..=qcorr::fock::MAX_N_CUT).contains(&self.n_cut) {
            return Err(CliError::Usage(format!("ncut must lie in [2, {}]", qcorr::fock::MAX_N_CUT)));
        }
        Ok(())
    }

    /// Same `key = value` syntax the loader accepts.
    pub fn render(&self) -> String {
        let out = self.out.as_ref().map_or("-".to_owned(), |p| p.display().to_string());
        format!(
            "format = {}\nprecision = {}\nseed = {}\nncut = {}\nout = {out}\n",
            self.format.name(),
            self.precision,
            self.seed,
            self.n_cut
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layering() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nformat = json\nseed=7\n\nncut = 40\n").unwrap();
        assert_eq!((c.format, c.seed, c.n_cut), (Format::Json, 7, 40));
        assert!(c.apply_text("bogus = 1").is_err());
        assert!(c.apply_text("precision").is_err());
    }

    #[test]
    fn render_round_trips() {
        let c = RunConfig { precision: 4, out: Some("x.csv".into()), ..RunConfig::default() };
        let mut d = RunConfig::default();
        d.apply_text(&c.render()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn bounds() {
        assert!(RunConfig { precision: 30, ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { n_cut: 1000, ..RunConfig::default() }.validate().is_err());
    }
}

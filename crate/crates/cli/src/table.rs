//! Tabular output shared by every subcommand: CSV with `#` header lines or a
//! JSON document carrying `schema_version`.

use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    /// Scientific notation, for error magnitudes that fixed point would flatten to zero.
    Sci(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

fn fixed(v: f64, precision: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.precision$}");
    // "-0.000" reads oddly and breaks byte comparisons between equal runs
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_owned()
    } else {
        s
    }
}

impl Cell {
    fn csv(&self, precision: usize) -> String {
        match self {
            Cell::Num(v) => fixed(*v, precision),
            Cell::Sci(v) if v.is_finite() => format!("{v:.3e}"),
            Cell::Sci(v) => fixed(*v, 0),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Str(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self, precision: usize) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => fixed(*v, precision).parse::<f64>().map_or(Value::Null, |r| json!(r)),
            Cell::Sci(v) if v.is_finite() => json!(format!("{v:.3e}").parse::<f64>().unwrap_or(*v)),
            Cell::Num(_) | Cell::Sci(_) | Cell::Empty => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Bool(b) => json!(b),
            Cell::Str(s) => json!(s),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub command: String,
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self { command: command.into(), columns: columns.iter().map(|s| s.to_string()).collect(), ..Self::default() }
    }

    pub fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.notes.push(s.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self, precision: usize) -> String {
        let mut out = format!("# qcorr {} (schema_version {SCHEMA_VERSION})\n", self.command);
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        out.push_str(&format!("# {}\n", self.columns.join(",")));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|c| c.csv(precision)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, precision: usize) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> =
                    self.columns.iter().cloned().zip(r.iter().map(|c| c.json(precision))).collect();
                Value::Object(m)
            })
            .collect();
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "notes": self.notes,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json values are always serializable");
        s.push('\n');
        s
    }
}

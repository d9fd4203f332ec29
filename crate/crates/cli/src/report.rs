use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    /// Integer too large for i64, kept as its decimal string.
    Big(String),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn rational(z: &BigRational) -> (Cell, Cell) {
        let num = z.numer().to_string();
        let den = z.denom().to_string();
        (Self::int_str(num), Self::int_str(den))
    }

    fn int_str(s: String) -> Cell {
        s.parse::<i64>().map(Cell::Int).unwrap_or(Cell::Big(s))
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(k) => json!(k),
            Cell::Big(s) | Cell::Text(s) => json!(s),
            Cell::Float(x) => float_json(*x),
            Cell::Bool(b) => json!(b),
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Int(k) => k.to_string(),
            Cell::Big(s) | Cell::Text(s) => s.clone(),
            Cell::Float(x) => float_text(*x),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as i64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// 17 significant digits.
pub fn float_text(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Non-finite floats become strings, everything else a JSON number.
pub fn float_json(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

pub fn rational_json(q: &BigRational) -> Value {
    json!({ "num": q.numer().to_string(), "den": q.denom().to_string() })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Provenance {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub degree: Option<usize>,
    pub seed: Option<u64>,
}

impl Provenance {
    fn to_json(self) -> Value {
        json!({
            "n": self.n,
            "m": self.m,
            "L": self.degree,
            "seed": self.seed,
            "version": env!("CARGO_PKG_VERSION"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// A numerical target was not reached; the report is still written.
    NonConvergence,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub provenance: Provenance,
    pub summary: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub outcome: Outcome,
    pub note: Option<String>,
}

impl Report {
    pub fn new(command: &'static str, provenance: Provenance) -> Self {
        Self {
            command,
            provenance,
            summary: Map::new(),
            columns: Vec::new(),
            rows: Vec::new(),
            outcome: Outcome::Ok,
            note: None,
        }
    }

    pub fn set(&mut self, key: &str, v: Value) {
        self.summary.insert(key.to_string(), v);
    }

    pub fn setf(&mut self, key: &str, x: f64) {
        self.set(key, float_json(x));
    }

    pub fn fail(&mut self, why: impl Into<String>) {
        self.outcome = Outcome::NonConvergence;
        self.note = Some(why.into());
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::to_json).collect())).collect();
        json!({
            "command": self.command,
            "provenance": self.provenance.to_json(),
            "status": match self.outcome { Outcome::Ok => "ok", Outcome::NonConvergence => "non-convergence" },
            "summary": Value::Object(self.summary.clone()),
            "columns": self.columns,
            "rows": rows,
        })
    }

    /// The table, or the summary as key/value rows when there is no table.
    pub fn to_csv(&self) -> io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.columns.is_empty() {
            w.write_record(["key", "value"])?;
            for (k, v) in &self.summary {
                let text = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(x) if x.is_f64() => float_text(x.as_f64().unwrap_or(f64::NAN)),
                    other => other.to_string(),
                };
                w.write_record([k.as_str(), text.as_str()])?;
            }
        } else {
            w.write_record(&self.columns)?;
            for r in &self.rows {
                w.write_record(r.iter().map(Cell::to_csv))?;
            }
        }
        w.into_inner().map_err(|e| io::Error::other(e.to_string())).map(|b| String::from_utf8(b).expect("utf-8"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Writes to `out`, else `<dir>/<command>.<ext>`, else stdout.
pub fn emit(report: &Report, format: Format, out: Option<&Path>, dir: Option<&Path>) -> io::Result<Option<PathBuf>> {
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.to_json()).map_err(io::Error::other)?;
            s.push('\n');
            s
        }
        Format::Csv => report.to_csv()?,
    };
    let path = match (out, dir) {
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(d)) => {
            fs::create_dir_all(d)?;
            Some(d.join(format!("{}.{}", report.command, format.ext())))
        }
        (None, None) => None,
    };
    match &path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(float_text(0.1), "1.0000000000000001e-1");
        assert_eq!(float_text(-9.869604401089358), "-9.8696044010893580e0");
    }

    #[test]
    fn big_integers_stay_exact() {
        let q = BigRational::new(10i64.pow(18).into(), 7.into()) * BigRational::from_integer(1000.into());
        let (n, d) = Cell::rational(&q);
        assert_eq!(n, Cell::Big("1000000000000000000000".into()));
        assert_eq!(d, Cell::Int(7));
    }
}

//! Tabular experiment output: CSV with a provenance header and a JSON sidecar.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{RunError, RunResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Num(x as f64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

/// Integers print plainly; everything else with 17 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 9.0e15 && !(x == 0.0 && x.is_sign_negative()) {
        format!("{}", x as i64)
    } else {
        format!("{x:.16e}")
    }
}

fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format_number(*x),
        Cell::Text(s) => s.clone(),
    }
}

fn parse_cell(s: &str) -> Cell {
    match s.parse::<f64>() {
        Ok(x) => Cell::Num(x),
        Err(_) => Cell::Text(s.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ExperimentRecord {
    pub fn new(config: &ExperimentConfig, columns: &[&str]) -> Self {
        ExperimentRecord {
            version: VERSION.to_string(),
            seed: config.seed,
            config_hash: config.hash(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column values, skipping text cells.
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else { return Vec::new() };
        self.rows.iter().filter_map(|r| r[i].as_f64()).collect()
    }

    pub fn header_line(&self) -> String {
        format!("# dissim v{} seed={} config={}", self.version, self.seed, self.config_hash)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> RunResult<()> {
        writeln!(out, "{}", self.header_line())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(format_cell))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: BufRead>(mut input: R) -> RunResult<Self> {
        let mut first = String::new();
        input.read_line(&mut first)?;
        let bad = || RunError::Numerical(format!("malformed header line: {}", first.trim_end()));
        let rest = first.trim_end().strip_prefix("# dissim v").ok_or_else(bad)?;
        let mut parts = rest.split(' ');
        let version = parts.next().ok_or_else(bad)?.to_string();
        let seed = parts
            .next()
            .and_then(|s| s.strip_prefix("seed="))
            .and_then(|s| s.parse().ok())
            .ok_or_else(bad)?;
        let config_hash = parts.next().and_then(|s| s.strip_prefix("config=")).ok_or_else(bad)?.to_string();
        let mut r = csv::Reader::from_reader(input);
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(parse_cell).collect()))
            .collect::<Result<Vec<Vec<Cell>>, _>>()?;
        Ok(ExperimentRecord { version, seed, config_hash, columns, rows })
    }
}

/// Everything a run produces.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunOutput {
    pub record: ExperimentRecord,
    pub config: serde_json::Value,
    /// Fits, pass/fail flags and other derived quantities.
    pub summary: serde_json::Value,
    pub wall_clock_s: f64,
}

impl RunOutput {
    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut p = path.as_os_str().to_owned();
        p.push(".json");
        PathBuf::from(p)
    }

    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "version": self.record.version,
            "seed": self.record.seed,
            "config_hash": self.record.config_hash,
            "config": self.config,
            "summary": self.summary,
            "wall_clock_s": self.wall_clock_s,
        })
    }

    /// CSV (or JSON) at `path` plus the `<path>.json` sidecar of the resolved config.
    pub fn write(&self, path: &Path, format: crate::config::Format) -> RunResult<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        match format {
            crate::config::Format::Csv => {
                let f = std::fs::File::create(path)?;
                self.record.write_csv(std::io::BufWriter::new(f))?;
            }
            crate::config::Format::Json => {
                let body = serde_json::to_string_pretty(&serde_json::json!({
                    "record": self.record,
                    "summary": self.summary,
                }))
                .expect("record serializes");
                std::fs::write(path, body)?;
            }
        }
        let side = serde_json::to_string_pretty(&self.sidecar()).expect("sidecar serializes");
        std::fs::write(Self::sidecar_path(path), side)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(4.0), "4");
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(-0.0), "-0.0000000000000000e0");
        assert_eq!(format_number(f64::NAN), "NaN");
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, 6.02214076e23] {
            assert_eq!(format_number(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_round_trip() {
        let cfg = ExperimentConfig::default();
        let mut rec = ExperimentRecord::new(&cfg, &["series", "n", "variance"]);
        rec.push(vec!["unitary".into(), 4usize.into(), (1.0f64 / 3.0).into()]);
        rec.push(vec!["a,b".into(), 6usize.into(), 1e-17.into()]);
        let text = rec.to_csv_string();
        assert!(text.starts_with(&format!("# dissim v{VERSION} seed=7 config={}", cfg.hash())));
        let back = ExperimentRecord::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.numbers("n"), vec![4.0, 6.0]);
    }
}

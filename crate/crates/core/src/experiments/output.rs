//! Sweep tables and their CSV form.

use std::io::Write;
use std::path::Path;

use crate::Result;

/// Run provenance written into every CSV header and row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    /// Free-form `key=value` notes, e.g. reference rates.
    pub notes: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(experiment: &str, config_hash: String, seed: u64) -> Self {
        Metadata {
            experiment: experiment.to_string(),
            config_hash,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            notes: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn get_note(&self, key: &str) -> Option<&str> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cells: Vec<Cell>,
    /// Why this point is suspect; `None` for a clean point.
    pub flag: Option<String>,
}

/// One table per sweep, rows in sweep order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub metadata: Metadata,
    /// `(name, unit)` per column, excluding the trailing hash and flag.
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

impl SweepResult {
    pub fn new(metadata: Metadata, columns: &[(&str, &str)]) -> Self {
        SweepResult {
            metadata,
            columns: columns.iter().map(|(n, u)| (n.to_string(), u.to_string())).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<Cell>, flag: Option<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(Row { cells, flag });
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|(n, _)| n == name)
    }

    /// Numeric values of one column, `NaN` where the cell is text.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r.cells[i].as_f64().unwrap_or(f64::NAN)).collect())
    }

    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.flag.is_some()).count()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let m = &self.metadata;
        writeln!(out, "# experiment: {}", m.experiment)?;
        writeln!(out, "# config_hash: {}", m.config_hash)?;
        writeln!(out, "# seed: {}", m.seed)?;
        writeln!(out, "# version: {}", m.version)?;
        let units: Vec<String> = self.columns.iter().map(|(n, u)| format!("{n}[{u}]")).collect();
        writeln!(out, "# units: {}", units.join(" "))?;
        for (k, v) in &m.notes {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        header.extend(["config_hash", "flag"]);
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.cells.iter().map(Cell::render).collect();
            rec.push(m.config_hash.clone());
            rec.push(row.flag.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

//! CSV ingestion and emission.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use fxpca::FunctionalSample;

use crate::error::{CliError, Result};

/// Reads a rectangular numeric CSV into an `n x d` sample (unit grid
/// weight). Rows are curves unless `transpose` is set, in which case
/// columns are.
pub fn ingest_csv(path: &Path, has_header: bool, transpose: bool) -> Result<FunctionalSample> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    ingest_reader(file, has_header, transpose)
}

pub fn ingest_reader<R: std::io::Read>(reader: R, has_header: bool, transpose: bool) -> Result<FunctionalSample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let first_line = if has_header { 2 } else { 1 };
    for (r, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("malformed CSV: {e}")))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let row: Vec<f64> = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    CliError::Data(format!(
                        "non-numeric cell '{cell}' at data row {}, column {} (line {})",
                        r + 1,
                        c + 1,
                        r + first_line
                    ))
                })
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CliError::Data(format!(
                    "ragged row: data row {} has {} fields, expected {}",
                    r + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(CliError::Data("empty input: no numeric rows".into()));
    }
    let rows = if transpose {
        (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c]).collect()).collect()
    } else {
        rows
    };
    Ok(FunctionalSample::from_rows(&rows, 1.0)?)
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// 17 significant digits, enough to round-trip any finite double.
pub fn format_float(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

/// Writes a header row and records with LF line endings.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a sample with columns `x1..xd`.
pub fn write_sample(path: &Path, x: &FunctionalSample) -> Result<()> {
    let header: Vec<String> = (1..=x.d()).map(|j| format!("x{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<Cell>> = x.rows().map(|r| r.iter().map(|&v| Cell::Float(v)).collect()).collect();
    write_csv(path, &header, &rows)
}

/// `key=value` lines in key order.
pub fn write_manifest(path: &Path, settings: &BTreeMap<String, String>) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?,
    );
    for (k, v) in settings {
        writeln!(w, "{k}={v}")?;
    }
    w.flush()?;
    Ok(())
}

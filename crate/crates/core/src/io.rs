//! CSV input and output for scenario matrices and small numeric tables.
//!
//! A scenario file has one scenario per line and one asset per column, comma
//! separated. An optional first line containing only `returns` or `losses`
//! declares the sign convention; returns are negated on load.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::ScenarioMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Returns,
    Losses,
}

impl ValueKind {
    fn from_header(cell: &str) -> Option<Self> {
        match cell.trim().to_ascii_lowercase().as_str() {
            "returns" => Some(Self::Returns),
            "losses" => Some(Self::Losses),
            _ => None,
        }
    }
}

fn parse_rows<R: Read>(reader: R) -> Result<(Option<String>, Vec<(usize, Vec<f64>)>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header = None;
    let mut rows = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(idx as u64 + 1, |p| p.line()) as usize;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if idx == 0 && record.len() == 1 && ValueKind::from_header(&record[0]).is_some() {
            header = Some(record[0].to_string());
            continue;
        }
        let values = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    row: line,
                    message: format!("not a number: {cell:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, values));
    }
    Ok((header, rows))
}

/// Reads a scenario matrix; `default` applies when the file has no header.
pub fn read_scenarios<R: Read>(reader: R, default: ValueKind) -> Result<ScenarioMatrix> {
    let (header, rows) = parse_rows(reader)?;
    let kind = header
        .as_deref()
        .and_then(ValueKind::from_header)
        .unwrap_or(default);
    let Some((_, first)) = rows.first() else {
        return Err(Error::Parse {
            row: 1,
            message: "file contains no scenarios".into(),
        });
    };
    let d = first.len();
    let mut data = Vec::with_capacity(rows.len() * d);
    for (line, values) in &rows {
        if values.len() != d {
            return Err(Error::Parse {
                row: *line,
                message: format!("expected {d} columns, found {}", values.len()),
            });
        }
        data.extend_from_slice(values);
    }
    match kind {
        ValueKind::Losses => ScenarioMatrix::new(rows.len(), d, data),
        ValueKind::Returns => ScenarioMatrix::from_returns(rows.len(), d, data),
    }
}

pub fn load_scenarios(path: impl AsRef<Path>, default: ValueKind) -> Result<ScenarioMatrix> {
    read_scenarios(File::open(path)?, default)
}

/// Writes a matrix as losses, with a `losses` header line.
pub fn write_scenarios<W: Write>(sm: &ScenarioMatrix, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    wtr.write_record(["losses"])?;
    for row in sm.rows() {
        wtr.write_record(row.iter().map(|x| format!("{x:e}")))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_scenarios(sm: &ScenarioMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_scenarios(sm, File::create(path)?)
}

/// Reads a two-column numeric table such as a `(u, gamma)` grid. A first line
/// that does not parse as numbers is taken as a header and skipped.
pub fn read_columns2<R: Read>(reader: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = idx + 1;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::Parse {
                row: line,
                message: format!("expected 2 columns, found {}", record.len()),
            });
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                a.push(x);
                b.push(y);
            }
            _ if idx == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    row: line,
                    message: "not a number".into(),
                })
            }
        }
    }
    Ok((a, b))
}

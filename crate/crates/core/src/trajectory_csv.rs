//! Trajectory CSV: header `iteration,node_1,...,node_n`, one row per state,
//! values written with 17 significant digits so they parse back to the same bits.

use thiserror::Error;

use crate::consensus::Trajectory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(String),
    #[error("bad header: expected `iteration,node_1,...`, got `{0}`")]
    Header(String),
    #[error("row {row}: expected {expected} columns, found {found}")]
    Width { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {column}: `{text}` is not a number")]
    Number { row: usize, column: usize, text: String },
    #[error("row {row}: iteration index {found}, expected {expected}")]
    Iteration { row: usize, expected: usize, found: String },
    #[error("no data rows")]
    Empty,
}

impl From<csv::Error> for CsvError {
    fn from(e: csv::Error) -> Self {
        CsvError::Csv(e.to_string())
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn header(n: usize) -> String {
    let mut h = String::from("iteration");
    for i in 1..=n {
        h.push_str(&format!(",node_{i}"));
    }
    h
}

/// Renders states as CSV text.
pub fn write_rows(rows: &[Vec<f64>]) -> String {
    let n = rows.first().map_or(0, Vec::len);
    let mut out = header(n);
    out.push('\n');
    for (k, row) in rows.iter().enumerate() {
        out.push_str(&k.to_string());
        for v in row {
            out.push(',');
            out.push_str(&format_value(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_trajectory(t: &Trajectory) -> String {
    let rows: Vec<Vec<f64>> = t.states.iter().map(|s| s.values().to_vec()).collect();
    write_rows(&rows)
}

/// Parses CSV text into state rows, checking header shape and iteration indices.
pub fn read_rows(text: &str) -> Result<Vec<Vec<f64>>, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let n = headers.len().saturating_sub(1);
    let header_ok = headers.get(0) == Some("iteration")
        && n > 0
        && headers.iter().skip(1).enumerate().all(|(i, h)| h == format!("node_{}", i + 1));
    if !header_ok {
        return Err(CsvError::Header(headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != n + 1 {
            return Err(CsvError::Width {
                row: r,
                expected: n + 1,
                found: record.len(),
            });
        }
        if record[0].parse::<usize>().ok() != Some(r) {
            return Err(CsvError::Iteration {
                row: r,
                expected: r,
                found: record[0].to_string(),
            });
        }
        let values = record
            .iter()
            .enumerate()
            .skip(1)
            .map(|(c, cell)| {
                cell.parse::<f64>().map_err(|_| CsvError::Number {
                    row: r,
                    column: c,
                    text: cell.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(rows)
}

//! Sample tables from CSV. The header must read exactly `t,y1,...,ym`,
//! every field must be a finite decimal number and `t` must increase
//! strictly from row to row. Rows are numbered from 1, header excluded.

use std::io::Read;
use std::path::Path;

use lindep_core::SampleTable;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("bad header `{found}`: expected `t,y1,...,ym`")]
    BadHeader { found: String },
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a finite number")]
    BadField { row: usize, column: String, value: String },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow { row: usize, found: usize, expected: usize },
    #[error("row {row} repeats time t = {t}")]
    DuplicateTime { row: usize, t: f64 },
    #[error("row {row}: time {t} is not after the previous time {prev}")]
    NonMonotoneTime { row: usize, t: f64, prev: f64 },
    #[error("no data rows")]
    Empty,
    #[error("csv: {0}")]
    Csv(String),
}

impl IngestError {
    pub fn kind(&self) -> &'static str {
        match self {
            IngestError::BadHeader { .. } => "bad_header",
            IngestError::BadField { .. } => "bad_field",
            IngestError::RaggedRow { .. } => "ragged_row",
            IngestError::DuplicateTime { .. } => "duplicate_time",
            IngestError::NonMonotoneTime { .. } => "non_monotone_time",
            IngestError::Empty => "empty_data",
            IngestError::Csv(_) => "csv",
        }
    }

    pub fn row(&self) -> Option<usize> {
        match *self {
            IngestError::BadField { row, .. }
            | IngestError::RaggedRow { row, .. }
            | IngestError::DuplicateTime { row, .. }
            | IngestError::NonMonotoneTime { row, .. } => Some(row),
            _ => None,
        }
    }
}

fn check_header(fields: &[&str]) -> bool {
    fields.len() >= 2
        && fields[0] == "t"
        && fields[1..]
            .iter()
            .enumerate()
            .all(|(i, f)| *f == format!("y{}", i + 1))
}

/// Parses CSV text from any reader.
pub fn read_csv<R: Read>(reader: R) -> Result<SampleTable, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| IngestError::Csv(e.to_string()))?,
        None => return Err(IngestError::BadHeader { found: String::new() }),
    };
    let names: Vec<&str> = header.iter().collect();
    if !check_header(&names) {
        return Err(IngestError::BadHeader { found: names.join(",") });
    }
    let width = names.len();
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();

    let mut times = Vec::new();
    let mut values = Vec::new();
    for (k, rec) in records.enumerate() {
        let row = k + 1;
        let rec = rec.map_err(|e| IngestError::Csv(e.to_string()))?;
        if rec.len() != width {
            return Err(IngestError::RaggedRow { row, found: rec.len(), expected: width });
        }
        let mut parsed = Vec::with_capacity(width);
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| IngestError::BadField {
                    row,
                    column: names[col].clone(),
                    value: field.to_string(),
                })?;
            parsed.push(v);
        }
        let t = parsed[0];
        if let Some(&prev) = times.last() {
            if t == prev {
                return Err(IngestError::DuplicateTime { row, t });
            }
            if t < prev {
                return Err(IngestError::NonMonotoneTime { row, t, prev });
            }
        }
        times.push(t);
        values.push(parsed[1..].to_vec());
    }
    if times.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(SampleTable { times, values })
}

/// Reads a sample table from a file.
pub fn ingest_csv(path: &Path) -> Result<SampleTable, crate::CliError> {
    let file = std::fs::File::open(path).map_err(|e| crate::CliError::io(path, e))?;
    Ok(read_csv(file)?)
}

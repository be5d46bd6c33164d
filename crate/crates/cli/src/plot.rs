//! Two-column CSV extraction from a JSON-lines report.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::report::csv_field;

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Parse {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
    #[error("{path}:{line}: field {field:?} not found in the report line or its extras")]
    MissingField {
        path: PathBuf,
        line: usize,
        field: String,
    },
    #[error("{path}:{line}: field {field:?} is not a number")]
    NotNumeric {
        path: PathBuf,
        line: usize,
        field: String,
    },
}

/// Looks a field up at the top level, then under `extras`. `null` reads as NaN, which
/// is how non-finite values are written.
fn lookup(obj: &Value, field: &str) -> Option<Result<f64, ()>> {
    let v = obj.get(field).or_else(|| obj.get("extras").and_then(|e| e.get(field)))?;
    Some(match v {
        Value::Number(n) => n.as_f64().ok_or(()),
        Value::Null => Ok(f64::NAN),
        Value::Bool(b) => Ok(if *b { 1.0 } else { 0.0 }),
        _ => Err(()),
    })
}

/// `(x, y)` pairs sorted by `x`, keeping the report order among equal `x`.
pub fn plot_points(report: &Path, x: &str, y: &str) -> Result<Vec<(f64, f64)>, PlotError> {
    let file = std::fs::File::open(report).map_err(|source| PlotError::Io {
        path: report.to_path_buf(),
        source,
    })?;
    let mut points = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| PlotError::Io {
            path: report.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let obj: Value = serde_json::from_str(&line).map_err(|source| PlotError::Parse {
            path: report.to_path_buf(),
            line: i + 1,
            source,
        })?;
        let get = |field: &str| match lookup(&obj, field) {
            None => Err(PlotError::MissingField {
                path: report.to_path_buf(),
                line: i + 1,
                field: field.to_string(),
            }),
            Some(Err(())) => Err(PlotError::NotNumeric {
                path: report.to_path_buf(),
                line: i + 1,
                field: field.to_string(),
            }),
            Some(Ok(v)) => Ok(v),
        };
        points.push((get(x)?, get(y)?));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(points)
}

pub fn write_plot<W: Write>(out: &mut W, x: &str, y: &str, points: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(out, "{},{}", csv_field(x), csv_field(y))?;
    for (a, b) in points {
        writeln!(out, "{a},{b}")?;
    }
    out.flush()
}

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{ExperimentBatchResult, ExperimentError};
use crate::stats::GenerationStats;

pub const CSV_HEADER: &str = "generation,max,mean,median,min";

/// Aggregate table text: the fixed header, then one row per generation with
/// six-decimal values.
pub fn render_aggregate_csv(rows: &[GenerationStats]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6}",
            r.generation, r.max, r.mean, r.median, r.min
        )
        .unwrap();
    }
    out
}

pub fn aggregate_to_csv(result: &ExperimentBatchResult, path: impl AsRef<Path>) -> Result<(), ExperimentError> {
    let path = path.as_ref();
    fs::write(path, render_aggregate_csv(&result.rows)).map_err(|source| ExperimentError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a table written by [`aggregate_to_csv`].
pub fn read_aggregate_csv(path: impl AsRef<Path>) -> Result<Vec<GenerationStats>, ExperimentError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ExperimentError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ExperimentError::Table(e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if headers != CSV_HEADER {
        return Err(ExperimentError::Table(format!(
            "expected header `{CSV_HEADER}`, found `{headers}`"
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ExperimentError::Table(e.to_string()))?;
        let bad = |field: &str| ExperimentError::Table(format!("row {}: bad {field}", i + 1));
        let real = |idx: usize, field: &str| {
            record
                .get(idx)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| bad(field))
        };
        rows.push(GenerationStats {
            generation: record
                .get(0)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad("generation"))?,
            max: real(1, "max")?,
            mean: real(2, "mean")?,
            median: real(3, "median")?,
            min: real(4, "min")?,
        });
    }
    Ok(rows)
}

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::scalar::Scalar;

/// One Iris measurement row with its class index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledExample<T> {
    pub features: [T; 4],
    pub label: usize,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: unknown label `{label}`, the dataset has exactly three classes")]
    UnknownLabel { line: usize, label: String },
}

const N_CLASSES: usize = 3;

/// Loads a five-column Iris CSV (four measurements then the species name).
///
/// A header row is skipped when its first field is not numeric. Species are
/// numbered 0, 1, 2 in order of first appearance.
pub fn load_iris<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<LabeledExample<T>>, DatasetError> {
    let path = path.as_ref();
    let io = |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut text = String::new();
    File::open(path).map_err(io)?.read_to_string(&mut text).map_err(io)?;
    parse_iris(&text)
}

pub fn parse_iris<T: Scalar>(text: &str) -> Result<Vec<LabeledExample<T>>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut species: Vec<String> = Vec::with_capacity(N_CLASSES);
    let mut examples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| DatasetError::Malformed {
            line,
            reason: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if record.len() != 5 {
            return Err(DatasetError::Malformed {
                line,
                reason: format!("expected 5 columns, found {}", record.len()),
            });
        }
        let mut features = [T::zero(); 4];
        for (slot, field) in features.iter_mut().zip(record.iter()) {
            let value: f64 = field.parse().map_err(|_| DatasetError::Malformed {
                line,
                reason: format!("`{field}` is not a number"),
            })?;
            *slot = T::of(value);
        }
        let name = &record[4];
        let label = match species.iter().position(|s| s == name) {
            Some(label) => label,
            None if species.len() < N_CLASSES => {
                species.push(name.to_string());
                species.len() - 1
            }
            None => {
                return Err(DatasetError::UnknownLabel {
                    line,
                    label: name.to_string(),
                })
            }
        };
        examples.push(LabeledExample { features, label });
    }
    Ok(examples)
}

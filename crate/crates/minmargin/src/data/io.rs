//! Plain-text dataset ingestion: comma-separated values and LIBSVM sparse
//! format, the two layouts the common benchmark pools ship in.

use super::{CsrMatrix, Dataset, FeatureMatrix};
use crate::error::{Error, Result};
use ndarray::Array2;
use std::collections::HashMap;
use std::fs;
use std::path::Path;

/// Sparse files at or below this dimensionality are densified at load time;
/// wider ones stay sparse. Purely a performance cutoff.
pub const DENSE_LIMIT: usize = 4096;

/// Integer label columns wider than this fall back to first-appearance id
/// mapping instead of being used as class ids directly.
const MAX_DIRECT_CLASS_ID: i64 = 1 << 20;

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Load a comma-separated file with one labeled example per row.
///
/// `label_column` indexes the label cell; every other cell must parse as a
/// real number. Integer labels forming a modest non-negative range are used
/// as class ids directly; any other label values (strings included) are
/// mapped to dense ids in first-appearance order.
pub fn load_csv(path: &Path, label_column: usize, has_header: bool) -> Result<Dataset> {
    let text = read_to_string(path)?;
    let display = path.display().to_string();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: display.clone(),
        line,
        message,
    };

    let mut width: Option<usize> = None;
    let mut values: Vec<f64> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if has_header && lineno == 0 {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let expected = *width.get_or_insert(cells.len());
        let row_number = raw_labels.len() + 1;
        if cells.len() != expected {
            return Err(parse_err(
                row_number,
                format!("expected {expected} columns, found {}", cells.len()),
            ));
        }
        if label_column >= cells.len() {
            return Err(parse_err(
                row_number,
                format!(
                    "label column {label_column} out of range for {} columns",
                    cells.len()
                ),
            ));
        }
        for (j, cell) in cells.iter().enumerate() {
            if j == label_column {
                raw_labels.push(cell.trim().to_string());
            } else {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    parse_err(row_number, format!("non-numeric feature cell {cell:?}"))
                })?;
                values.push(v);
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(Error::InvalidData(format!("{display} contains no data rows")));
    }

    let dim = width.unwrap() - 1;
    let n = raw_labels.len();
    let features = Array2::from_shape_vec((n, dim), values)
        .expect("row width was checked per line");

    let labels = map_labels(&raw_labels);
    Dataset::from_dense(features, labels)
}

/// Map raw label strings to class ids.
///
/// If every label is an integer in `[0, MAX_DIRECT_CLASS_ID)` the values are
/// used as ids unchanged; otherwise ids follow first-appearance order.
fn map_labels(raw: &[String]) -> Vec<usize> {
    let as_ints: Option<Vec<i64>> = raw.iter().map(|s| s.parse::<i64>().ok()).collect();
    if let Some(ints) = as_ints {
        if ints
            .iter()
            .all(|&v| (0..MAX_DIRECT_CLASS_ID).contains(&v))
        {
            return ints.into_iter().map(|v| v as usize).collect();
        }
    }
    let mut ids: HashMap<&str, usize> = HashMap::new();
    raw.iter()
        .map(|s| {
            let next = ids.len();
            *ids.entry(s.as_str()).or_insert(next)
        })
        .collect()
}

/// Load a LIBSVM sparse text file: `label idx:val idx:val ...` per line with
/// 1-based strictly increasing indices.
///
/// D is the largest index seen. Labels in {−1, +1} map to {0, 1}; any other
/// integer labels map densely in ascending order. Files whose dimensionality
/// is at most [`DENSE_LIMIT`] are densified.
pub fn load_libsvm(path: &Path) -> Result<Dataset> {
    let text = read_to_string(path)?;
    let display = path.display().to_string();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: display.clone(),
        line,
        message,
    };

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut raw_labels: Vec<i64> = Vec::new();
    let mut dim = 0usize;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row_number = rows.len() + 1;
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a first token");
        let label: i64 = label_tok
            .trim_start_matches('+')
            .parse()
            .or_else(|_| {
                // Tolerate float-formatted integer labels such as "1.0".
                label_tok
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.fract() == 0.0)
                    .map(|v| v as i64)
                    .ok_or(())
            })
            .map_err(|_| parse_err(row_number, format!("bad label token {label_tok:?}")))?;

        let mut entries: Vec<(usize, f64)> = Vec::new();
        let mut last_index = 0usize;
        for tok in tokens {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| {
                parse_err(row_number, format!("malformed index:value pair {tok:?}"))
            })?;
            let idx: usize = idx_s.parse().map_err(|_| {
                parse_err(row_number, format!("bad feature index {idx_s:?}"))
            })?;
            let val: f64 = val_s.parse().map_err(|_| {
                parse_err(row_number, format!("bad feature value {val_s:?}"))
            })?;
            if idx == 0 {
                return Err(parse_err(row_number, "feature indices are 1-based".into()));
            }
            if idx <= last_index {
                return Err(parse_err(
                    row_number,
                    format!("feature indices must be strictly increasing (saw {idx} after {last_index})"),
                ));
            }
            last_index = idx;
            dim = dim.max(idx);
            entries.push((idx - 1, val));
        }
        raw_labels.push(label);
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(Error::InvalidData(format!("{display} contains no data rows")));
    }

    let labels = map_libsvm_labels(&raw_labels);
    let csr = CsrMatrix::from_rows(&rows, dim)?;
    let features = if dim <= DENSE_LIMIT {
        FeatureMatrix::Dense(csr.to_dense())
    } else {
        FeatureMatrix::Sparse(csr)
    };
    Dataset::new(features, labels)
}

/// LIBSVM label convention: {−1, +1} → {0, 1}; otherwise dense ids assigned
/// in ascending label order.
fn map_libsvm_labels(raw: &[i64]) -> Vec<usize> {
    if raw.iter().all(|&v| v == -1 || v == 1) {
        return raw.iter().map(|&v| usize::from(v == 1)).collect();
    }
    let mut distinct: Vec<i64> = raw.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let ids: HashMap<i64, usize> = distinct
        .into_iter()
        .enumerate()
        .map(|(id, v)| (v, id))
        .collect();
    raw.iter().map(|v| ids[v]).collect()
}

use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::{encode_labels, parse_finite, Dataset, Task};
use crate::error::{Error, Result};

/// Loads `label idx:val ...` lines with 1-based indices into a dense matrix
/// whose width is the largest index seen. Binary labels may be 0/1 or ±1.
pub fn load_libsvm(path: impl AsRef<Path>, task: Task) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm(&text, task)
}

pub fn parse_libsvm(text: &str, task: Task) -> Result<Dataset> {
    let mut labels: Vec<String> = Vec::new();
    let mut rows: Vec<usize> = Vec::new();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut width = 0usize;

    for (lineno, line) in text.lines().enumerate() {
        let row = lineno + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let label = parts.next().expect("non-empty line");
        let mut feats = Vec::new();
        for (k, part) in parts.enumerate() {
            let column = k + 2;
            let (idx, val) = part.split_once(':').ok_or_else(|| Error::Parse {
                row,
                column,
                message: format!("expected idx:val, found '{part}'"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                row,
                column,
                message: format!("bad feature index '{idx}'"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    row,
                    column,
                    message: "feature indices are 1-based".into(),
                });
            }
            let val = parse_finite(val).ok_or_else(|| Error::Parse {
                row,
                column,
                message: format!("bad feature value '{val}'"),
            })?;
            width = width.max(idx);
            feats.push((idx - 1, val));
        }
        let label = match (task, label) {
            (Task::Binary, "-1" | "-1.0") => "0".to_string(),
            (Task::Binary, "+1") => "1".to_string(),
            (_, l) => l.to_string(),
        };
        labels.push(label);
        rows.push(row);
        entries.push(feats);
    }

    if labels.is_empty() {
        return Err(Error::Empty("libsvm file has no rows".into()));
    }
    let (y, class_names) = encode_labels(&labels, task, &rows, 1)?;
    let mut x = Array2::zeros((labels.len(), width.max(1)));
    for (i, feats) in entries.iter().enumerate() {
        for &(j, v) in feats {
            x[[i, j]] = v;
        }
    }
    let data = Dataset::new(x, y, task)?;
    match class_names {
        Some(names) => data.with_class_names(names),
        None => Ok(data),
    }
}

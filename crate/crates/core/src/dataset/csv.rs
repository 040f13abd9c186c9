use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::{encode_labels, Dataset, LabelSpec, Task};
use crate::error::{Error, Result};

/// Loads a comma-separated file.
///
/// A non-label column is categorical as soon as one of its cells fails to
/// parse as a number; categorical columns expand into one-hot columns named
/// `column=value`, in first-appearance order. Missing cells are rejected.
pub fn load_csv(
    path: impl AsRef<Path>,
    label: &LabelSpec,
    task: Task,
    has_header: bool,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(file, label, task, has_header)
}

pub fn parse_csv<R: Read>(
    reader: R,
    label: &LabelSpec,
    task: Task,
    has_header: bool,
) -> Result<Dataset> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(reader);

    let mut records: Vec<Vec<String>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row: i + 1,
            column: 0,
            message: e.to_string(),
        })?;
        // skip fully blank lines
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        records.push(rec.iter().map(str::to_string).collect());
    }

    let header = if has_header {
        if records.is_empty() {
            return Err(Error::Empty("csv file has no header".into()));
        }
        Some(records.remove(0))
    } else {
        None
    };
    let first_data_row = if has_header { 2 } else { 1 };
    let width = match (&header, records.first()) {
        (Some(h), _) => h.len(),
        (None, Some(r)) => r.len(),
        (None, None) => 0,
    };
    if records.is_empty() {
        return Err(Error::Empty("csv file has no data rows".into()));
    }
    if width < 2 {
        return Err(Error::InvalidDataset(
            "csv needs at least one feature column and a label column".into(),
        ));
    }
    for (i, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::Parse {
                row: i + first_data_row,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        if let Some(j) = rec.iter().position(String::is_empty) {
            return Err(Error::Parse {
                row: i + first_data_row,
                column: j + 1,
                message: "missing value".into(),
            });
        }
    }

    let label_col = match label {
        LabelSpec::Last => width - 1,
        LabelSpec::Index(idx) if *idx < width => *idx,
        LabelSpec::Index(idx) => {
            return Err(Error::LabelMissing(format!(
                "index {idx} but the file has {width} columns"
            )))
        }
        LabelSpec::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::LabelMissing(name.clone()))?,
    };

    let rows: Vec<usize> = (0..records.len()).map(|i| i + first_data_row).collect();
    let tokens: Vec<String> = records.iter().map(|r| r[label_col].clone()).collect();
    let (labels, class_names) = encode_labels(&tokens, task, &rows, label_col + 1)?;

    let n = records.len();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for col in (0..width).filter(|&c| c != label_col) {
        let col_name = header
            .as_ref()
            .map_or_else(|| format!("c{col}"), |h| h[col].clone());
        let parsed: Vec<Option<f64>> = records.iter().map(|r| r[col].parse::<f64>().ok()).collect();
        if parsed.iter().all(Option::is_some) {
            let values: Vec<f64> = parsed.into_iter().map(Option::unwrap).collect();
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    row: rows[i],
                    column: col + 1,
                    message: format!("non-finite value '{}'", records[i][col]),
                });
            }
            columns.push(values);
            names.push(col_name);
        } else {
            let mut categories: Vec<&str> = Vec::new();
            for r in &records {
                if !categories.contains(&r[col].as_str()) {
                    categories.push(&r[col]);
                }
            }
            for cat in &categories {
                columns.push(
                    records
                        .iter()
                        .map(|r| if r[col] == *cat { 1.0 } else { 0.0 })
                        .collect(),
                );
                names.push(format!("{col_name}={cat}"));
            }
        }
    }

    let features = Array2::from_shape_fn((n, columns.len()), |(i, j)| columns[j][i]);
    let mut data = Dataset::new(features, labels, task)?;
    if let Some(h) = &header {
        data = data
            .with_feature_names(names)?
            .with_label_name(h[label_col].clone());
    }
    if let Some(classes) = class_names {
        data = data.with_class_names(classes)?;
    }
    Ok(data)
}

/// Canonical writer: features first, the label last. A header is written
/// only when the dataset carries feature names. Class names replace numeric
/// labels when present, so reading the file back reproduces the dataset.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv_to(data, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv_to<W: Write>(data: &Dataset, w: &mut W) -> std::io::Result<()> {
    if let Some(names) = data.feature_names() {
        let label = data.label_name().unwrap_or("label");
        writeln!(w, "{},{label}", names.join(","))?;
    }
    let classes = data.class_indices().ok();
    for (i, row) in data.features().rows().into_iter().enumerate() {
        let mut line = row.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        line.push(',');
        match (data.class_names(), &classes) {
            (Some(names), Some(idx)) => line.push_str(&names[idx[i]]),
            (None, Some(idx)) => line.push_str(&idx[i].to_string()),
            _ => line.push_str(&data.labels()[[i, 0]].to_string()),
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

//! Tabular datasets: validated feature/label matrices plus the loaders and the
//! train/test splitter that feed the booster.

mod csv;
mod libsvm;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub use self::csv::{load_csv, parse_csv, write_csv, write_csv_to};
pub use self::libsvm::{load_libsvm, parse_libsvm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Binary,
    Multiclass,
}

impl Task {
    pub fn is_classification(self) -> bool {
        !matches!(self, Task::Regression)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Regression => "regression",
            Task::Binary => "binary",
            Task::Multiclass => "multiclass",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regression" | "reg" => Ok(Task::Regression),
            "binary" => Ok(Task::Binary),
            "multiclass" | "multi" => Ok(Task::Multiclass),
            other => Err(Error::InvalidParam(format!("unknown task '{other}'"))),
        }
    }
}

/// Which column of a CSV file holds the label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelSpec {
    Name(String),
    Index(usize),
    Last,
}

impl FromStr for LabelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("last") {
            Ok(LabelSpec::Last)
        } else if let Ok(idx) = s.parse::<usize>() {
            Ok(LabelSpec::Index(idx))
        } else {
            Ok(LabelSpec::Name(s.to_string()))
        }
    }
}

/// Features `n × p`, labels `n × d`, and the task that constrains the labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Array2<f64>,
    task: Task,
    feature_names: Option<Vec<String>>,
    class_names: Option<Vec<String>>,
    label_name: Option<String>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Array2<f64>, task: Task) -> Result<Self> {
        validate(&features, &labels, task)?;
        Ok(Dataset {
            features,
            labels,
            task,
            feature_names: None,
            class_names: None,
            label_name: None,
        })
    }

    /// Builds a classification dataset from integer class indices.
    pub fn from_class_indices(features: Array2<f64>, classes: &[usize], task: Task) -> Result<Self> {
        let labels = match task {
            Task::Regression => {
                return Err(Error::InvalidDataset(
                    "class indices require a classification task".into(),
                ))
            }
            Task::Binary => Array2::from_shape_fn((classes.len(), 1), |(i, _)| classes[i] as f64),
            Task::Multiclass => {
                let d = classes.iter().copied().max().map_or(0, |m| m + 1).max(2);
                let mut y = Array2::zeros((classes.len(), d));
                for (i, &c) in classes.iter().enumerate() {
                    y[[i, c]] = 1.0;
                }
                y
            }
        };
        Dataset::new(features, labels, task)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features() {
            return Err(Error::Dimension(format!(
                "{} feature names for {} columns",
                names.len(),
                self.n_features()
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        let expected = match self.task {
            Task::Regression => {
                return Err(Error::InvalidDataset("regression labels have no classes".into()))
            }
            Task::Binary => 2,
            Task::Multiclass => self.label_dim(),
        };
        if names.len() != expected {
            return Err(Error::Dimension(format!(
                "{} class names for {expected} classes",
                names.len()
            )));
        }
        self.class_names = Some(names);
        Ok(self)
    }

    pub fn with_label_name(mut self, name: impl Into<String>) -> Self {
        self.label_name = Some(name.into());
        self
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &Array2<f64> {
        &self.labels
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    pub fn label_name(&self) -> Option<&str> {
        self.label_name.as_deref()
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn label_dim(&self) -> usize {
        self.labels.ncols()
    }

    /// Class index per row: the 0/1 label for binary tasks, the hot column
    /// for multiclass.
    pub fn class_indices(&self) -> Result<Vec<usize>> {
        match self.task {
            Task::Regression => Err(Error::InvalidDataset(
                "regression dataset has no class labels".into(),
            )),
            Task::Binary => Ok(self.labels.column(0).iter().map(|&y| y as usize).collect()),
            Task::Multiclass => Ok(self
                .labels
                .rows()
                .into_iter()
                .map(|row| row.iter().position(|&v| v == 1.0).unwrap_or(0))
                .collect()),
        }
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::Empty("row selection".into()));
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows()) {
            return Err(Error::Dimension(format!(
                "row {bad} out of range for {} rows",
                self.n_rows()
            )));
        }
        Ok(Dataset {
            features: self.features.select(Axis(0), rows),
            labels: self.labels.select(Axis(0), rows),
            task: self.task,
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            label_name: self.label_name.clone(),
        })
    }
}

fn validate(features: &Array2<f64>, labels: &Array2<f64>, task: Task) -> Result<()> {
    let (n, p) = features.dim();
    let d = labels.ncols();
    if n == 0 {
        return Err(Error::Empty("dataset has no rows".into()));
    }
    if p == 0 {
        return Err(Error::InvalidDataset("dataset has no feature columns".into()));
    }
    if d == 0 {
        return Err(Error::InvalidDataset("dataset has no label columns".into()));
    }
    if labels.nrows() != n {
        return Err(Error::Dimension(format!(
            "{n} feature rows but {} label rows",
            labels.nrows()
        )));
    }
    if let Some(((i, j), v)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidDataset(format!(
            "non-finite feature {v} at row {i}, column {j}"
        )));
    }
    if let Some(((i, j), v)) = labels.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidDataset(format!(
            "non-finite label {v} at row {i}, column {j}"
        )));
    }
    match task {
        Task::Regression if d != 1 => Err(Error::InvalidDataset(format!(
            "regression needs one label column, got {d}"
        ))),
        Task::Binary if d != 1 => Err(Error::InvalidDataset(format!(
            "binary classification needs one label column, got {d}"
        ))),
        Task::Binary => match labels.iter().position(|&y| y != 0.0 && y != 1.0) {
            Some(i) => Err(Error::InvalidLabel(format!(
                "binary label {} at row {i} is not 0 or 1",
                labels[[i, 0]]
            ))),
            None => Ok(()),
        },
        Task::Multiclass if d < 2 => Err(Error::InvalidDataset(format!(
            "multiclass needs at least two label columns, got {d}"
        ))),
        Task::Multiclass => {
            for (i, row) in labels.rows().into_iter().enumerate() {
                let ones = row.iter().filter(|&&v| v == 1.0).count();
                let zeros = row.iter().filter(|&&v| v == 0.0).count();
                if ones != 1 || ones + zeros != d {
                    return Err(Error::InvalidLabel(format!("label row {i} is not one-hot")));
                }
            }
            Ok(())
        }
        Task::Regression => Ok(()),
    }
}

/// Turns raw label tokens into a label matrix for `task`.
///
/// Multiclass tokens map to one-hot columns in first-appearance order. Binary
/// labels are either numeric 0/1 or exactly two distinct strings, the first
/// seen becoming class 0.
pub(crate) fn encode_labels(
    tokens: &[String],
    task: Task,
    rows: &[usize],
    column: usize,
) -> Result<(Array2<f64>, Option<Vec<String>>)> {
    let n = tokens.len();
    match task {
        Task::Regression => {
            let mut y = Array2::zeros((n, 1));
            for (i, tok) in tokens.iter().enumerate() {
                y[[i, 0]] = parse_finite(tok).ok_or_else(|| Error::Parse {
                    row: rows[i],
                    column,
                    message: format!("label '{tok}' is not a finite number"),
                })?;
            }
            Ok((y, None))
        }
        Task::Binary => {
            let numeric: Option<Vec<f64>> = tokens.iter().map(|t| parse_finite(t)).collect();
            if let Some(values) = numeric {
                if let Some(i) = values.iter().position(|&v| v != 0.0 && v != 1.0) {
                    return Err(Error::InvalidLabel(format!(
                        "binary label '{}' at row {} is not 0 or 1",
                        tokens[i], rows[i]
                    )));
                }
                return Ok((Array2::from_shape_vec((n, 1), values).expect("n x 1"), None));
            }
            let classes = first_appearance(tokens);
            if classes.len() != 2 {
                return Err(Error::LabelCardinality(format!(
                    "binary task expects 2 distinct labels, found {}",
                    classes.len()
                )));
            }
            let y = Array2::from_shape_fn((n, 1), |(i, _)| {
                if tokens[i] == classes[0] {
                    0.0
                } else {
                    1.0
                }
            });
            Ok((y, Some(classes)))
        }
        Task::Multiclass => {
            let classes = first_appearance(tokens);
            if classes.len() < 2 {
                return Err(Error::LabelCardinality(format!(
                    "multiclass task expects at least 2 distinct labels, found {}",
                    classes.len()
                )));
            }
            let mut y = Array2::zeros((n, classes.len()));
            for (i, tok) in tokens.iter().enumerate() {
                let c = classes.iter().position(|k| k == tok).expect("class collected");
                y[[i, c]] = 1.0;
            }
            Ok((y, Some(classes)))
        }
    }
}

fn first_appearance(tokens: &[String]) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    for tok in tokens {
        if !seen.contains(tok) {
            seen.push(tok.clone());
        }
    }
    seen
}

pub(crate) fn parse_finite(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Fraction of rows held out for testing, plus the shuffle seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(test_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            test_fraction,
            seed,
        }
    }
}

/// Row indices `(train, test)` for a seeded split of `n` rows.
///
/// The test side holds `max(1, floor(n * fraction))` rows. The fraction is
/// rejected when its complement does not cover a whole row.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    let f = spec.test_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::InvalidSplit(format!(
            "test fraction {f} is outside (0, 1)"
        )));
    }
    let nominal_train = (n as f64 * (1.0 - f)).floor() as usize;
    if n < 2 || nominal_train == 0 {
        return Err(Error::InvalidSplit(format!(
            "test fraction {f} over {n} rows leaves the training side empty"
        )));
    }
    let n_test = ((n as f64 * f).floor() as usize).max(1);
    if n_test >= n {
        return Err(Error::InvalidSplit(format!(
            "test fraction {f} over {n} rows leaves the training side empty"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut gen = rng::seeded(spec.seed);
    rng::shuffle(&mut gen, &mut order);
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Deterministic `(train, test)` partition of `data`.
pub fn train_test_split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(data.n_rows(), spec)?;
    Ok((data.select_rows(&train)?, data.select_rows(&test)?))
}

/// Dispatches on extension: `.svm`, `.libsvm` and `.svmlight` are read as
/// LibSVM, everything else as CSV.
pub fn load_path(
    path: impl AsRef<std::path::Path>,
    label: &LabelSpec,
    task: Task,
    has_header: bool,
) -> Result<Dataset> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("svm" | "libsvm" | "svmlight") => load_libsvm(path, task),
        _ => load_csv(path, label, task, has_header),
    }
}

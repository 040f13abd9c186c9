//! Where the public benchmark datasets come from and what shape they should
//! have once loaded. Nothing here downloads; it only checks local files.

use serde::Serialize;

use crate::dataset::{Dataset, Task};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub url: &'static str,
    pub task: Task,
    /// Input columns.
    pub features: usize,
    /// Label dimension.
    pub outputs: usize,
    /// Boosting rounds used for this dataset in the search protocol.
    pub rounds: usize,
    pub metric: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "mnist",
        url: "https://www.openml.org/d/554",
        task: Task::Multiclass,
        features: 784,
        outputs: 10,
        rounds: 20,
        metric: "error_rate",
    },
    CatalogEntry {
        name: "fashion_mnist",
        url: "https://www.openml.org/d/40996",
        task: Task::Multiclass,
        features: 784,
        outputs: 10,
        rounds: 20,
        metric: "error_rate",
    },
    CatalogEntry {
        name: "titanic",
        url: "https://www.kaggle.com/c/titanic/data",
        task: Task::Binary,
        features: 8,
        outputs: 1,
        rounds: 100,
        metric: "error_rate",
    },
    CatalogEntry {
        name: "digits",
        url: "https://archive.ics.uci.edu/dataset/80/optical+recognition+of+handwritten+digits",
        task: Task::Multiclass,
        features: 64,
        outputs: 10,
        rounds: 100,
        metric: "error_rate",
    },
    CatalogEntry {
        name: "adult",
        url: "https://archive.ics.uci.edu/dataset/2/adult",
        task: Task::Binary,
        features: 108,
        outputs: 1,
        rounds: 100,
        metric: "error_rate",
    },
    CatalogEntry {
        name: "forest_fires",
        url: "https://archive.ics.uci.edu/dataset/162/forest+fires",
        task: Task::Regression,
        features: 12,
        outputs: 1,
        rounds: 100,
        metric: "rmse",
    },
];

pub fn lookup(name: &str) -> Option<&'static CatalogEntry> {
    let key = name.to_ascii_lowercase().replace('-', "_");
    CATALOG.iter().find(|e| e.name == key)
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogCheck {
    pub name: &'static str,
    pub expected_features: usize,
    pub expected_outputs: usize,
    pub encoded_features: usize,
    /// Distinct source columns behind the encoded features.
    pub source_columns: usize,
    pub outputs: usize,
    pub ok: bool,
}

/// Number of source columns behind one-hot names of the form `column=value`.
pub fn source_columns(data: &Dataset) -> usize {
    match data.feature_names() {
        None => data.n_features(),
        Some(names) => {
            let mut seen: Vec<&str> = Vec::new();
            for name in names {
                let base = name.split_once('=').map_or(name.as_str(), |(b, _)| b);
                if !seen.contains(&base) {
                    seen.push(base);
                }
            }
            seen.len()
        }
    }
}

/// The feature count passes if either the encoded width or the number of
/// source columns matches the expected input dimension.
pub fn verify(entry: &'static CatalogEntry, data: &Dataset) -> CatalogCheck {
    let encoded = data.n_features();
    let source = source_columns(data);
    let ok = data.task() == entry.task
        && data.label_dim() == entry.outputs
        && (encoded == entry.features || source == entry.features);
    CatalogCheck {
        name: entry.name,
        expected_features: entry.features,
        expected_outputs: entry.outputs,
        encoded_features: encoded,
        source_columns: source,
        outputs: data.label_dim(),
        ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{parse_csv, LabelSpec};

    #[test]
    fn lookup_is_forgiving() {
        assert_eq!(lookup("Fashion-MNIST").unwrap().features, 784);
        assert!(lookup("iris").is_none());
    }

    #[test]
    fn verify_counts_source_columns() {
        let text = "a,b,y\n1,x,0\n2,y,1\n3,z,0\n4,x,1\n5,y,0\n6,z,1\n7,x,0\n8,y,1\n";
        let d = parse_csv(text.as_bytes(), &LabelSpec::Last, Task::Binary, true).unwrap();
        assert_eq!(d.n_features(), 4);
        assert_eq!(source_columns(&d), 2);
        let entry = lookup("titanic").unwrap();
        assert!(!verify(entry, &d).ok);
    }
}

//! Experiment protocols: the width sweep, the random hyperparameter search
//! comparing wide against standard boosting, and the tree-budget comparison.

pub mod catalog;
pub mod search;
pub mod sweep;
pub mod synthetic;

use crate::dataset::{train_test_split, Dataset, SplitSpec};
use crate::error::Result;

pub use search::{
    budgeted_gb, budgeted_rounds, compare, pct_improvement, random_search, repeat_search,
    ExperimentReport, RepeatSummary, SearchMode, SearchSpace, TrialConfig, TrialRecord,
};
pub use sweep::{default_kind_for_width, sweep_params, width_sweep, SweepPoint, SweepReport};

/// A named train/test pair that every trial of an experiment shares.
#[derive(Clone, Debug)]
pub struct Benchmark {
    pub name: String,
    pub train: Dataset,
    pub test: Dataset,
}

impl Benchmark {
    pub fn new(name: impl Into<String>, train: Dataset, test: Dataset) -> Self {
        Benchmark {
            name: name.into(),
            train,
            test,
        }
    }

    pub fn split(name: impl Into<String>, data: &Dataset, split: &SplitSpec) -> Result<Self> {
        let (train, test) = train_test_split(data, split)?;
        Ok(Benchmark::new(name, train, test))
    }

    pub fn label_dim(&self) -> usize {
        self.train.label_dim()
    }
}

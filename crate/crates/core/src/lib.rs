//! Wide gradient boosting.
//!
//! A second-order gradient-boosted tree engine whose `q`-column ensemble output
//! `F` passes through a fixed `q × d` matrix `β` before the loss, so training
//! minimizes `L(Y, F·β)`. With `q = d` and `β = I` this is ordinary gradient
//! boosting; `q > d` widens the model with extra trees per round whose outputs
//! are mixed into the label dimensions by `β`.

pub mod beta;
pub mod booster;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod objective;
pub mod parallel;
pub mod rng;
pub mod tree;

pub use beta::{widen, BetaKind, BetaMatrix, BetaSpec};
pub use booster::{load_model, predict, predict_labels, save_model, train, BoostParams, Ensemble, EvalTrace};
pub use dataset::{load_csv, train_test_split, Dataset, LabelSpec, SplitSpec, Task};
pub use error::{Error, Result};
pub use metrics::{MetricKind, MetricReport};
pub use objective::{GradHess, LossKind, WideObjective};
pub use tree::{fit_tree, predict_tree, Tree, TreeParams};

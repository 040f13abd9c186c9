//! The boosting loop under the wide objective, prediction, and persistence.
//!
//! Each round evaluates the gradient and diagonal hessian of `L(Y, F·β)` once
//! at the current `F`, fits one tree per output column `j ∈ 0..q` to
//! `(grad[:, j], hess[:, j])`, and adds `η · tree_j(X)` to column `j`.

mod model_file;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beta::{BetaMatrix, BetaSpec};
use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::metrics::{self, MetricKind};
use crate::objective::{LossKind, WideObjective};
use crate::parallel;
use crate::tree::{fit_tree_sorted, SortedFeatures, Tree, TreeParams};

pub use model_file::{load_model, save_model, MODEL_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub tree: TreeParams,
    pub beta: BetaSpec,
    pub loss: LossKind,
    pub base_score: f64,
}

impl BoostParams {
    /// 100 rounds at η = 0.1 with default tree settings and a zero base score.
    pub fn new(loss: LossKind, beta: BetaSpec) -> Self {
        BoostParams {
            rounds: 100,
            learning_rate: 0.1,
            tree: TreeParams::default(),
            beta,
            loss,
            base_score: 0.0,
        }
    }

    /// Standard boosting: `q = d`, `β = I`.
    pub fn standard(loss: LossKind, d: usize) -> Self {
        BoostParams::new(loss, BetaSpec::identity(d))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "learning rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        if !self.base_score.is_finite() {
            return Err(Error::InvalidParam("base score must be finite".into()));
        }
        self.tree.validate()?;
        self.beta.validate()
    }
}

/// Per-round record of a training run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalTrace {
    /// Metric on the evaluation set after each round; empty without one.
    pub metric: Option<MetricKind>,
    pub values: Vec<f64>,
    /// `L(Y_train, F·β)` before the first round and after every round.
    pub train_loss: Vec<f64>,
}

impl EvalTrace {
    /// Smallest evaluation metric and the 1-based round that reached it.
    pub fn best(&self) -> Option<(f64, usize)> {
        self.values
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(f64, usize)>, (i, &v)| match acc {
                Some((b, _)) if b <= v => acc,
                _ => Some((v, i + 1)),
            })
    }

    pub fn final_value(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Whether the training loss never increased from one round to the next.
    pub fn train_loss_non_increasing(&self) -> bool {
        self.train_loss.windows(2).all(|w| w[1] <= w[0])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    trees: Vec<Vec<Tree>>,
    beta: BetaMatrix,
    base_score: f64,
    params: BoostParams,
    n_features: usize,
}

impl Ensemble {
    pub(crate) fn from_parts(
        trees: Vec<Vec<Tree>>,
        beta: BetaMatrix,
        base_score: f64,
        params: BoostParams,
        n_features: usize,
    ) -> Result<Self> {
        params.validate()?;
        if *beta.spec() != params.beta {
            return Err(Error::Schema("beta spec disagrees with params".into()));
        }
        if trees.len() != params.rounds {
            return Err(Error::Schema(format!(
                "{} rounds of trees, params say {}",
                trees.len(),
                params.rounds
            )));
        }
        for (r, round) in trees.iter().enumerate() {
            if round.len() != beta.q() {
                return Err(Error::Schema(format!(
                    "round {r} has {} trees, expected q = {}",
                    round.len(),
                    beta.q()
                )));
            }
            for tree in round {
                tree.validate(Some(n_features))?;
            }
        }
        WideObjective::new(params.loss, beta.clone())?;
        Ok(Ensemble {
            trees,
            beta,
            base_score,
            params,
            n_features,
        })
    }

    pub fn trees(&self) -> &[Vec<Tree>] {
        &self.trees
    }

    pub fn beta(&self) -> &BetaMatrix {
        &self.beta
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn params(&self) -> &BoostParams {
        &self.params
    }

    pub fn task(&self) -> Task {
        self.params.loss.task()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn label_dim(&self) -> usize {
        self.beta.d()
    }

    pub fn width(&self) -> usize {
        self.beta.q()
    }

    pub fn rounds(&self) -> usize {
        self.trees.len()
    }

    /// Always `rounds × q`.
    pub fn tree_count(&self) -> usize {
        self.trees.iter().map(Vec::len).sum()
    }

    /// Ensemble output `F(X)`, shape `m × q`.
    pub fn predict_raw(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        check_features(x, self.n_features)?;
        let mut f = Array2::from_elem((x.nrows(), self.width()), self.base_score);
        for round in &self.trees {
            add_round(&mut f, x, round, self.params.learning_rate);
        }
        Ok(f)
    }

    /// Raw scores `F(X)·β`, shape `m × d`.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let f = self.predict_raw(x)?;
        self.beta.widen(f.view())
    }

    pub fn predict_labels(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        if !self.task().is_classification() {
            return Err(Error::InvalidParam(
                "predict_labels needs a classification model".into(),
            ));
        }
        metrics::labels_from_scores(self.predict(x)?.view(), self.task())
    }
}

pub fn predict(model: &Ensemble, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    model.predict(x)
}

pub fn predict_labels(model: &Ensemble, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
    model.predict_labels(x)
}

fn check_features(x: ArrayView2<'_, f64>, p: usize) -> Result<()> {
    if x.ncols() != p {
        return Err(Error::Dimension(format!(
            "input has {} features, model expects {p}",
            x.ncols()
        )));
    }
    if let Some(((i, j), _)) = x.indexed_iter().find(|(_, v)| v.is_nan()) {
        return Err(Error::InvalidInput(format!("NaN feature at row {i}, column {j}")));
    }
    Ok(())
}

fn add_round(f: &mut Array2<f64>, x: ArrayView2<'_, f64>, round: &[Tree], eta: f64) {
    for (mut frow, xrow) in f.rows_mut().into_iter().zip(x.rows()) {
        for (j, tree) in round.iter().enumerate() {
            frow[j] += eta * tree.predict_row(|k| xrow[k]);
        }
    }
}

fn check_dataset(data: &Dataset, params: &BoostParams, what: &str) -> Result<()> {
    if params.loss.task() != data.task() {
        return Err(Error::InvalidParam(format!(
            "loss {} does not fit {what} task {}",
            params.loss,
            data.task()
        )));
    }
    if params.beta.d != data.label_dim() {
        return Err(Error::Dimension(format!(
            "beta d = {} but {what} labels have {} columns",
            params.beta.d,
            data.label_dim()
        )));
    }
    Ok(())
}

/// Trains with the task's comparison metric on `eval`.
pub fn train(
    data: &Dataset,
    params: &BoostParams,
    eval: Option<&Dataset>,
) -> Result<(Ensemble, EvalTrace)> {
    train_with_metric(data, params, eval, MetricKind::for_task(data.task()))
}

pub fn train_with_metric(
    data: &Dataset,
    params: &BoostParams,
    eval: Option<&Dataset>,
    metric: MetricKind,
) -> Result<(Ensemble, EvalTrace)> {
    params.validate()?;
    check_dataset(data, params, "training")?;
    if let Some(ev) = eval {
        check_dataset(ev, params, "evaluation")?;
        if ev.n_features() != data.n_features() {
            return Err(Error::Dimension(format!(
                "evaluation set has {} features, training set {}",
                ev.n_features(),
                data.n_features()
            )));
        }
    }

    let beta = BetaMatrix::build(params.beta)?;
    let objective = WideObjective::new(params.loss, beta.clone())?;
    let x = data.features().view();
    let y = data.labels().view();
    let sorted = SortedFeatures::new(x)?;
    let q = beta.q();

    let mut f = Array2::from_elem((data.n_rows(), q), params.base_score);
    let mut f_eval = eval.map(|ev| Array2::from_elem((ev.n_rows(), q), params.base_score));
    let mut trace = EvalTrace {
        metric: eval.map(|_| metric),
        values: Vec::new(),
        train_loss: vec![finite_loss(&objective, y, f.view(), 0)?],
    };
    let mut trees = Vec::with_capacity(params.rounds);

    for round in 0..params.rounds {
        let gh = objective.grad_hess(y, f.view())?;
        let fitted: Vec<Result<Tree>> = parallel::pool().install(|| {
            (0..q)
                .into_par_iter()
                .map(|j| {
                    let g = gh.grad.column(j).to_vec();
                    let h = gh.hess.column(j).to_vec();
                    fit_tree_sorted(&sorted, x, &g, &h, &params.tree)
                })
                .collect()
        });
        let round_trees = fitted.into_iter().collect::<Result<Vec<Tree>>>()?;

        add_round(&mut f, x, &round_trees, params.learning_rate);
        trace
            .train_loss
            .push(finite_loss(&objective, y, f.view(), round + 1)?);
        if let (Some(ev), Some(fe)) = (eval, f_eval.as_mut()) {
            add_round(fe, ev.features().view(), &round_trees, params.learning_rate);
            let scores = beta.widen(fe.view())?;
            trace.values.push(metrics::evaluate(metric, scores.view(), ev)?.value);
        }
        trees.push(round_trees);
    }

    let model = Ensemble {
        trees,
        beta,
        base_score: params.base_score,
        params: *params,
        n_features: data.n_features(),
    };
    Ok((model, trace))
}

fn finite_loss(
    objective: &WideObjective,
    y: ArrayView2<'_, f64>,
    f: ArrayView2<'_, f64>,
    round: usize,
) -> Result<f64> {
    match objective.loss_value(y, f) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) | Err(Error::InvalidInput(_)) => Err(Error::NonFiniteLoss { round }),
        Err(e) => Err(e),
    }
}

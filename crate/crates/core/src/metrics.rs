//! Evaluation metrics: classification error rate, RMSE and mean log-loss.

use std::fmt;
use std::str::FromStr;

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::objective::{score_loss, LossKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    ErrorRate,
    Rmse,
    Logloss,
}

impl MetricKind {
    /// The comparison metric for a task: error rate for classification, RMSE
    /// for regression.
    pub fn for_task(task: Task) -> Self {
        if task.is_classification() {
            MetricKind::ErrorRate
        } else {
            MetricKind::Rmse
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::ErrorRate => "error_rate",
            MetricKind::Rmse => "rmse",
            MetricKind::Logloss => "logloss",
        })
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" | "error_rate" => Ok(MetricKind::ErrorRate),
            "rmse" => Ok(MetricKind::Rmse),
            "logloss" => Ok(MetricKind::Logloss),
            other => Err(Error::InvalidParam(format!("unknown metric '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric_kind: MetricKind,
    pub value: f64,
    pub n_eval: usize,
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} (n={})",
            self.metric_kind,
            format_sig6(self.value),
            self.n_eval
        )
    }
}

/// Fixed six-significant-digit rendering used for printed metrics.
pub fn format_sig6(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}");
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a == 0 || b == 0 {
        return Err(Error::Empty("metric input".into()));
    }
    if a != b {
        return Err(Error::Dimension(format!("{a} predictions vs {b} targets")));
    }
    Ok(())
}

/// Fraction of mismatched labels.
pub fn error_rate(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let wrong = pred.iter().zip(truth).filter(|(p, t)| p != t).count();
    Ok(wrong as f64 / pred.len() as f64)
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}

/// Mean per-sample negative log-likelihood of raw scores `n × d`.
pub fn logloss(scores: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, task: Task) -> Result<f64> {
    if !task.is_classification() {
        return Err(Error::InvalidParam("logloss needs a classification task".into()));
    }
    check_lengths(scores.nrows(), y.nrows())?;
    Ok(score_loss(LossKind::for_task(task), y, scores)? / scores.nrows() as f64)
}

/// Binary: 1 iff the score is strictly positive. Multiclass: argmax, ties to
/// the lowest class index.
pub fn labels_from_scores(scores: ArrayView2<'_, f64>, task: Task) -> Result<Vec<usize>> {
    match task {
        Task::Regression => Err(Error::InvalidParam(
            "labels are undefined for regression".into(),
        )),
        Task::Binary => Ok(scores.column(0).iter().map(|&s| usize::from(s > 0.0)).collect()),
        Task::Multiclass => Ok(scores.rows().into_iter().map(argmax).collect()),
    }
}

fn argmax(row: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Evaluates raw scores against a dataset's labels.
pub fn evaluate(kind: MetricKind, scores: ArrayView2<'_, f64>, data: &Dataset) -> Result<MetricReport> {
    if scores.dim() != data.labels().dim() {
        return Err(Error::Dimension(format!(
            "scores {:?} vs labels {:?}",
            scores.dim(),
            data.labels().dim()
        )));
    }
    let value = match kind {
        MetricKind::ErrorRate => {
            error_rate(&labels_from_scores(scores, data.task())?, &data.class_indices()?)?
        }
        MetricKind::Rmse => {
            if data.task() != Task::Regression {
                return Err(Error::InvalidParam("rmse needs a regression task".into()));
            }
            rmse(&scores.column(0).to_vec(), &data.labels().column(0).to_vec())?
        }
        MetricKind::Logloss => logloss(scores, data.labels().view(), data.task())?,
    };
    Ok(MetricReport {
        metric_kind: kind,
        value,
        n_eval: data.n_rows(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};

    #[test]
    fn error_rate_examples() {
        assert_eq!(error_rate(&[0, 1, 2], &[0, 1, 2]).unwrap(), 0.0);
        assert_eq!(error_rate(&[1, 0], &[0, 1]).unwrap(), 1.0);
        assert_eq!(error_rate(&[0, 1, 1, 1], &[0, 1, 0, 1]).unwrap(), 0.25);
        assert!(error_rate(&[], &[]).is_err());
        assert!(error_rate(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 12.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(rmse(&[2.0], &[5.0]).unwrap(), 3.0);
        assert!(rmse(&[], &[]).is_err());
    }

    #[test]
    fn logloss_examples() {
        let v = logloss(array![[0.0]].view(), array![[1.0]].view(), Task::Binary).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::LN_2, epsilon = 1e-15);

        let mut y = Array2::zeros((3, 10));
        y[[0, 2]] = 1.0;
        y[[1, 9]] = 1.0;
        y[[2, 0]] = 1.0;
        let v = logloss(Array2::zeros((3, 10)).view(), y.view(), Task::Multiclass).unwrap();
        assert_abs_diff_eq!(v, 10f64.ln(), epsilon = 1e-14);

        let v = logloss(array![[30.0], [-30.0]].view(), array![[1.0], [0.0]].view(), Task::Binary)
            .unwrap();
        assert!((0.0..1e-12).contains(&v));
        assert!(logloss(array![[0.0]].view(), array![[1.0]].view(), Task::Regression).is_err());
    }

    #[test]
    fn label_tie_rules() {
        assert_eq!(labels_from_scores(array![[0.0], [1e-300], [-1.0]].view(), Task::Binary).unwrap(), vec![0, 1, 0]);
        assert_eq!(labels_from_scores(array![[1.0, 3.0, 3.0]].view(), Task::Multiclass).unwrap(), vec![1]);
        assert_eq!(labels_from_scores(array![[0.0, 0.0, 0.0]].view(), Task::Multiclass).unwrap(), vec![0]);
        assert!(labels_from_scores(array![[0.0]].view(), Task::Regression).is_err());
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(3.535533905932738), "3.53553");
        assert_eq!(format_sig6(0.0074), "0.00740000");
        assert_eq!(format_sig6(1234567.0), "1234567");
        assert_eq!(format_sig6(0.0), "0");
    }

    proptest::proptest! {
        #[test]
        fn error_rate_is_permutation_invariant(
            pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..40),
            seed in proptest::prelude::any::<u64>(),
        ) {
            let (p, t): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
            let mut idx: Vec<usize> = (0..p.len()).collect();
            crate::rng::shuffle(&mut crate::rng::seeded(seed), &mut idx);
            let ps: Vec<_> = idx.iter().map(|&i| p[i]).collect();
            let ts: Vec<_> = idx.iter().map(|&i| t[i]).collect();
            proptest::prop_assert_eq!(error_rate(&p, &t).unwrap(), error_rate(&ps, &ts).unwrap());
        }

        #[test]
        fn rmse_is_sign_symmetric(r in proptest::collection::vec(-100.0f64..100.0, 1..30)) {
            let zeros = vec![0.0; r.len()];
            let neg: Vec<f64> = r.iter().map(|v| -v).collect();
            proptest::prop_assert_eq!(rmse(&r, &zeros).unwrap(), rmse(&neg, &zeros).unwrap());
        }
    }
}

use serde::{Deserialize, Serialize};

use super::Benchmark;
use crate::beta::{BetaKind, BetaSpec};
use crate::booster::{train, BoostParams, EvalTrace};
use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::objective::LossKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub q: usize,
    pub beta_kind: BetaKind,
    pub final_metric: Option<f64>,
    pub tree_count: usize,
    pub trace: EvalTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub dataset: String,
    pub metric: MetricKind,
    pub params: BoostParams,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn point(&self, q: usize) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.q == q)
    }
}

/// Random β below the label dimension, identity-based at or above it.
pub fn default_kind_for_width(q: usize, d: usize) -> BetaKind {
    if q < d {
        BetaKind::R
    } else {
        BetaKind::I
    }
}

/// Depth-2 trees at η = 0.1 for `rounds` rounds.
pub fn sweep_params(loss: LossKind, d: usize, rounds: usize) -> BoostParams {
    let mut params = BoostParams::standard(loss, d);
    params.rounds = rounds;
    params.learning_rate = 0.1;
    params.tree.max_depth = 2;
    params
}

/// One full training run per width, everything else held at `fixed`. The β
/// seed comes from `fixed.beta.seed`; `kind` overrides the per-width default.
pub fn width_sweep(
    bench: &Benchmark,
    widths: &[usize],
    fixed: &BoostParams,
    kind: Option<BetaKind>,
) -> Result<SweepReport> {
    if widths.is_empty() {
        return Err(Error::InvalidParam("width sweep needs at least one width".into()));
    }
    let d = bench.label_dim();
    let metric = MetricKind::for_task(bench.train.task());
    let mut points = Vec::with_capacity(widths.len());
    for &q in widths {
        let beta_kind = kind.unwrap_or_else(|| default_kind_for_width(q, d));
        let params = BoostParams {
            beta: BetaSpec::new(beta_kind, q, d, fixed.beta.seed),
            ..*fixed
        };
        let (model, trace) = train(&bench.train, &params, Some(&bench.test)).map_err(|e| Error::Width {
            q,
            source: Box::new(e),
        })?;
        points.push(SweepPoint {
            q,
            beta_kind,
            final_metric: trace.final_value(),
            tree_count: model.tree_count(),
            trace,
        });
    }
    Ok(SweepReport {
        dataset: bench.name.clone(),
        metric,
        params: *fixed,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dataset, SplitSpec, Task};
    use ndarray::Array2;

    fn bench() -> Benchmark {
        let x = Array2::from_shape_fn((80, 2), |(i, j)| ((i * (j + 3)) % 23) as f64);
        let classes: Vec<usize> = (0..80).map(|i| ((i * 3) % 23) / 8).collect();
        let data = Dataset::from_class_indices(x, &classes, Task::Multiclass).unwrap();
        Benchmark::split("toy", &data, &SplitSpec::new(0.25, 2)).unwrap()
    }

    #[test]
    fn identity_width_matches_standard_run() {
        let b = bench();
        let params = sweep_params(LossKind::MulticlassLogloss, 3, 10);
        let report = width_sweep(&b, &[3], &params, None).unwrap();
        let (_, reference) = train(&b.train, &params, Some(&b.test)).unwrap();
        assert_eq!(report.points[0].trace, reference);
        assert_eq!(report.points[0].beta_kind, BetaKind::I);
    }

    #[test]
    fn kinds_follow_width() {
        let b = bench();
        let params = sweep_params(LossKind::MulticlassLogloss, 3, 2);
        let report = width_sweep(&b, &[2, 3, 5], &params, None).unwrap();
        let kinds: Vec<_> = report.points.iter().map(|p| p.beta_kind).collect();
        assert_eq!(kinds, vec![BetaKind::R, BetaKind::I, BetaKind::I]);
        assert_eq!(report.point(5).unwrap().tree_count, 10);
        assert_eq!(report.point(5).unwrap().trace.values.len(), 2);
    }

    #[test]
    fn errors_name_the_width() {
        let b = bench();
        let params = sweep_params(LossKind::MulticlassLogloss, 3, 2);
        assert!(width_sweep(&b, &[], &params, None).is_err());
        let err = width_sweep(&b, &[2], &params, Some(BetaKind::I)).unwrap_err();
        assert!(matches!(err, Error::Width { q: 2, .. }));
    }
}

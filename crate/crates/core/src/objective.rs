//! Gradients and element-wise second derivatives of `L(Y, F·β)` with respect
//! to the ensemble output `F`.
//!
//! Every loss is written as a function of the widened scores `S = F·β`. With
//! `D = ∂L/∂S` the chain rule gives `∂L/∂F = D·βᵀ`; the diagonal curvature
//! comes from the loss-specific closed forms below. Log-losses are negative
//! log-likelihoods, so all three describe a minimisation.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::beta::{matmul, BetaMatrix};
use crate::dataset::Task;
use crate::error::{Error, Result};

/// Lower clamp on probabilities before taking logs.
pub const PROB_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    SquaredError,
    BinaryLogloss,
    MulticlassLogloss,
}

impl LossKind {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Regression => LossKind::SquaredError,
            Task::Binary => LossKind::BinaryLogloss,
            Task::Multiclass => LossKind::MulticlassLogloss,
        }
    }

    pub fn task(self) -> Task {
        match self {
            LossKind::SquaredError => Task::Regression,
            LossKind::BinaryLogloss => Task::Binary,
            LossKind::MulticlassLogloss => Task::Multiclass,
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::SquaredError => "squared_error",
            LossKind::BinaryLogloss => "binary_logloss",
            LossKind::MulticlassLogloss => "multiclass_logloss",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared_error" | "squared" | "l2" => Ok(LossKind::SquaredError),
            "binary_logloss" | "binary" | "logloss" => Ok(LossKind::BinaryLogloss),
            "multiclass_logloss" | "multiclass" | "softmax" => Ok(LossKind::MulticlassLogloss),
            other => Err(Error::InvalidParam(format!("unknown loss '{other}'"))),
        }
    }
}

/// Per-element gradient and diagonal hessian, both shaped like `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradHess {
    pub grad: Array2<f64>,
    pub hess: Array2<f64>,
}

#[derive(Clone, Debug)]
pub struct WideObjective {
    loss: LossKind,
    beta: BetaMatrix,
}

impl WideObjective {
    pub fn new(loss: LossKind, beta: BetaMatrix) -> Result<Self> {
        match loss {
            LossKind::SquaredError | LossKind::BinaryLogloss if beta.d() != 1 => {
                Err(Error::Dimension(format!("{loss} needs d = 1, beta has d = {}", beta.d())))
            }
            LossKind::MulticlassLogloss if beta.d() < 2 => Err(Error::Dimension(
                "multiclass_logloss needs d >= 2".to_string(),
            )),
            _ => Ok(WideObjective { loss, beta }),
        }
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss
    }

    pub fn beta(&self) -> &BetaMatrix {
        &self.beta
    }

    /// `L(Y, F·β)` summed over samples.
    pub fn loss_value(&self, y: ArrayView2<'_, f64>, f: ArrayView2<'_, f64>) -> Result<f64> {
        check_shapes(y, f, &self.beta)?;
        let scores = matmul(f, self.beta.values());
        let value = score_loss(self.loss, y, scores.view())?;
        if !value.is_finite() {
            return Err(Error::InvalidInput("loss is not finite".into()));
        }
        Ok(value)
    }

    pub fn grad_hess(&self, y: ArrayView2<'_, f64>, f: ArrayView2<'_, f64>) -> Result<GradHess> {
        match self.loss {
            LossKind::SquaredError => grad_hess_squared(y, f, &self.beta),
            LossKind::BinaryLogloss => grad_hess_binary(y, f, &self.beta),
            LossKind::MulticlassLogloss => grad_hess_multiclass(y, f, &self.beta),
        }
    }
}

fn check_shapes(y: ArrayView2<'_, f64>, f: ArrayView2<'_, f64>, beta: &BetaMatrix) -> Result<()> {
    if f.ncols() != beta.q() {
        return Err(Error::Dimension(format!(
            "F has {} columns, beta has q = {}",
            f.ncols(),
            beta.q()
        )));
    }
    if y.ncols() != beta.d() {
        return Err(Error::Dimension(format!(
            "Y has {} columns, beta has d = {}",
            y.ncols(),
            beta.d()
        )));
    }
    if y.nrows() != f.nrows() {
        return Err(Error::Dimension(format!(
            "Y has {} rows, F has {}",
            y.nrows(),
            f.nrows()
        )));
    }
    Ok(())
}

fn check_binary_labels(y: ArrayView2<'_, f64>) -> Result<()> {
    match y.iter().position(|&v| v != 0.0 && v != 1.0) {
        Some(i) => Err(Error::InvalidLabel(format!("binary label at row {i} is not 0 or 1"))),
        None => Ok(()),
    }
}

fn check_one_hot(y: ArrayView2<'_, f64>) -> Result<()> {
    for (i, row) in y.rows().into_iter().enumerate() {
        let ones = row.iter().filter(|&&v| v == 1.0).count();
        let zeros = row.iter().filter(|&&v| v == 0.0).count();
        if ones != 1 || ones + zeros != row.len() {
            return Err(Error::InvalidLabel(format!("label row {i} is not one-hot")));
        }
    }
    Ok(())
}

/// Loss of already-widened scores `S = F·β` (shape `n × d`), summed over rows.
pub fn score_loss(loss: LossKind, y: ArrayView2<'_, f64>, scores: ArrayView2<'_, f64>) -> Result<f64> {
    if y.dim() != scores.dim() {
        return Err(Error::Dimension(format!(
            "labels {:?} vs scores {:?}",
            y.dim(),
            scores.dim()
        )));
    }
    let floor = PROB_FLOOR.ln();
    Ok(match loss {
        LossKind::SquaredError => {
            0.5 * Zip::from(y).and(scores).fold(0.0, |acc, &yv, &s| acc + (yv - s) * (yv - s))
        }
        LossKind::BinaryLogloss => {
            check_binary_labels(y)?;
            Zip::from(y).and(scores).fold(0.0, |acc, &yv, &s| {
                let log_p = log_sigmoid(s).max(floor);
                let log_not_p = log_sigmoid(-s).max(floor);
                acc - (yv * log_p + (1.0 - yv) * log_not_p)
            })
        }
        LossKind::MulticlassLogloss => {
            check_one_hot(y)?;
            let mut total = 0.0;
            for (yrow, srow) in y.rows().into_iter().zip(scores.rows()) {
                let log_p = log_softmax(srow);
                for (yv, lp) in yrow.iter().zip(log_p.iter()) {
                    if *yv != 0.0 {
                        total -= yv * lp.max(floor);
                    }
                }
            }
            total
        }
    })
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x) = −softplus(−x)`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Row softmax with max subtraction.
pub fn softmax(row: ArrayView1<'_, f64>) -> Array1<f64> {
    let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let mut out = row.mapv(|v| (v - max).exp());
    let sum = out.sum();
    out /= sum;
    out
}

pub fn log_softmax(row: ArrayView1<'_, f64>) -> Array1<f64> {
    let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let lse = row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln() + max;
    row.mapv(|v| v - lse)
}

/// Squared error `½‖Y − Fβ‖²`: gradient `(Fβ − Y)βᵀ`, hessian `β_j²` in
/// every row.
pub fn grad_hess_squared(
    y: ArrayView2<'_, f64>,
    f: ArrayView2<'_, f64>,
    beta: &BetaMatrix,
) -> Result<GradHess> {
    check_shapes(y, f, beta)?;
    if beta.d() != 1 {
        return Err(Error::Dimension("squared error needs d = 1".into()));
    }
    let b = beta.values();
    let residual = matmul(f, b) - y;
    let grad = matmul(residual.view(), b.t());
    let b_sq = b.column(0).mapv(|v| v * v);
    let hess = Array2::from_shape_fn(f.dim(), |(_, j)| b_sq[j]);
    Ok(GradHess { grad, hess })
}

/// Binary log-loss with `P = σ(Fβ)`: gradient `(P − Y)βᵀ`, hessian
/// `P(1 − P)·β_j²`.
pub fn grad_hess_binary(
    y: ArrayView2<'_, f64>,
    f: ArrayView2<'_, f64>,
    beta: &BetaMatrix,
) -> Result<GradHess> {
    check_shapes(y, f, beta)?;
    if beta.d() != 1 {
        return Err(Error::Dimension("binary log-loss needs d = 1".into()));
    }
    check_binary_labels(y)?;
    let b = beta.values();
    let p = matmul(f, b).mapv(sigmoid);
    let grad = matmul((&p - &y).view(), b.t());
    let b_sq = b.column(0).mapv(|v| v * v);
    let hess = Array2::from_shape_fn(f.dim(), |(i, j)| {
        let pi = p[[i, 0]];
        pi * (1.0 - pi) * b_sq[j]
    });
    Ok(GradHess { grad, hess })
}

/// Multiclass log-loss with row-softmax `P` of `Fβ`: gradient `(P − Y)βᵀ`,
/// hessian `[P(β⊙β)ᵀ − (Pβᵀ ⊙ Pβᵀ)]_ij`.
///
/// The hessian is evaluated as `Σ_k P_ik (β_jk − m_ij)²` with
/// `m_ij = Σ_k P_ik β_jk`, the same quantity written as a variance, which
/// cannot go negative through cancellation.
pub fn grad_hess_multiclass(
    y: ArrayView2<'_, f64>,
    f: ArrayView2<'_, f64>,
    beta: &BetaMatrix,
) -> Result<GradHess> {
    check_shapes(y, f, beta)?;
    check_one_hot(y)?;
    let b = beta.values();
    let scores = matmul(f, b);
    let mut p = Array2::zeros(scores.dim());
    for (mut prow, srow) in p.rows_mut().into_iter().zip(scores.rows()) {
        prow.assign(&softmax(srow));
    }
    let grad = matmul((&p - &y).view(), b.t());
    let (n, q) = f.dim();
    let mut hess = Array2::zeros((n, q));
    for (i, prow) in p.rows().into_iter().enumerate() {
        for (j, brow) in b.rows().into_iter().enumerate() {
            let m: f64 = prow.iter().zip(brow.iter()).map(|(pk, bk)| pk * bk).sum();
            hess[[i, j]] = prow
                .iter()
                .zip(brow.iter())
                .map(|(pk, bk)| pk * (bk - m) * (bk - m))
                .sum();
        }
    }
    Ok(GradHess { grad, hess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::{BetaKind, BetaSpec};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn beta_from(values: Array2<f64>) -> BetaMatrix {
        let (q, d) = values.dim();
        BetaMatrix::from_parts(BetaSpec::new(BetaKind::R, q, d, 0), values).unwrap()
    }

    #[test]
    fn loss_value_examples() {
        let sq = WideObjective::new(LossKind::SquaredError, beta_from(array![[1.0]])).unwrap();
        assert_eq!(sq.loss_value(array![[3.0]].view(), array![[0.0]].view()).unwrap(), 4.5);

        let bin = WideObjective::new(LossKind::BinaryLogloss, beta_from(array![[1.0]])).unwrap();
        let v = bin.loss_value(array![[1.0]].view(), array![[0.0]].view()).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::LN_2, epsilon = 1e-15);

        let eye = BetaMatrix::build(BetaSpec::identity(3)).unwrap();
        let multi = WideObjective::new(LossKind::MulticlassLogloss, eye).unwrap();
        let v = multi
            .loss_value(array![[0.0, 1.0, 0.0]].view(), array![[0.0, 0.0, 0.0]].view())
            .unwrap();
        assert_abs_diff_eq!(v, 3f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn objective_rejects_wrong_label_dimension() {
        let eye = BetaMatrix::build(BetaSpec::identity(3)).unwrap();
        assert!(WideObjective::new(LossKind::SquaredError, eye.clone()).is_err());
        assert!(WideObjective::new(LossKind::BinaryLogloss, eye).is_err());
        let one = BetaMatrix::build(BetaSpec::identity(1)).unwrap();
        assert!(WideObjective::new(LossKind::MulticlassLogloss, one).is_err());
    }

    #[test]
    fn squared_examples() {
        let gh = grad_hess_squared(array![[3.0]].view(), array![[0.0]].view(), &beta_from(array![[1.0]]))
            .unwrap();
        assert_eq!(gh.grad, array![[-3.0]]);
        assert_eq!(gh.hess, array![[1.0]]);

        let b = beta_from(array![[2.0], [1.0]]);
        let gh = grad_hess_squared(array![[0.0]].view(), array![[1.0, 1.0]].view(), &b).unwrap();
        assert_eq!(gh.grad, array![[6.0, 3.0]]);
        assert_eq!(gh.hess, array![[4.0, 1.0]]);

        // at the minimum the gradient vanishes
        let f = array![[0.5, -1.0], [2.0, 0.25]];
        let y = matmul(f.view(), b.values());
        let gh = grad_hess_squared(y.view(), f.view(), &b).unwrap();
        assert!(gh.grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn binary_examples() {
        let b = beta_from(array![[0.5], [0.5]]);
        let gh = grad_hess_binary(array![[1.0]].view(), array![[0.0, 0.0]].view(), &b).unwrap();
        assert_eq!(gh.grad, array![[-0.25, -0.25]]);
        assert_eq!(gh.hess, array![[0.0625, 0.0625]]);

        let gh = grad_hess_binary(array![[0.0]].view(), array![[30.0]].view(), &beta_from(array![[1.0]]))
            .unwrap();
        assert_abs_diff_eq!(gh.grad[[0, 0]], 1.0, epsilon = 1e-12);
        assert!(gh.hess[[0, 0]] >= 0.0 && gh.hess[[0, 0]] < 1e-12);

        assert!(matches!(
            grad_hess_binary(array![[2.0]].view(), array![[0.0]].view(), &beta_from(array![[1.0]])),
            Err(Error::InvalidLabel(_))
        ));
    }

    #[test]
    fn multiclass_uniform_example() {
        let eye = BetaMatrix::build(BetaSpec::identity(3)).unwrap();
        let gh = grad_hess_multiclass(
            array![[1.0, 0.0, 0.0]].view(),
            array![[0.0, 0.0, 0.0]].view(),
            &eye,
        )
        .unwrap();
        let expected_g = [-2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0];
        for (j, g) in expected_g.iter().enumerate() {
            assert_abs_diff_eq!(gh.grad[[0, j]], *g, epsilon = 1e-15);
            assert_abs_diff_eq!(gh.hess[[0, j]], 2.0 / 9.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn multiclass_identity_hessian_is_p_one_minus_p() {
        let eye = BetaMatrix::build(BetaSpec::identity(4)).unwrap();
        let f = array![[0.3, -1.2, 2.0, 0.1], [5.0, -5.0, 0.0, 1.0]];
        let y = array![[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]];
        let gh = grad_hess_multiclass(y.view(), f.view(), &eye).unwrap();
        for (i, row) in f.rows().into_iter().enumerate() {
            let p = softmax(row);
            for j in 0..4 {
                assert_abs_diff_eq!(gh.hess[[i, j]], p[j] * (1.0 - p[j]), epsilon = 1e-16);
            }
            assert_abs_diff_eq!(gh.grad.row(i).sum(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn multiclass_rejects_non_one_hot() {
        let eye = BetaMatrix::build(BetaSpec::identity(2)).unwrap();
        assert!(grad_hess_multiclass(array![[1.0, 1.0]].view(), array![[0.0, 0.0]].view(), &eye).is_err());
        assert!(grad_hess_multiclass(array![[1.0, 0.0]].view(), array![[0.0, 0.0, 0.0]].view(), &eye).is_err());
    }

    #[test]
    fn stable_primitives_at_extremes() {
        assert_eq!(sigmoid(-800.0), 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
        assert!(log_sigmoid(-800.0).is_finite());
        let p = softmax(array![1000.0, 0.0, -1000.0].view());
        assert!(p.iter().all(|v| v.is_finite()));
        assert_abs_diff_eq!(p.sum(), 1.0, epsilon = 1e-15);
    }
}

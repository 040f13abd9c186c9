#![allow(dead_code)]

use std::path::PathBuf;

use ndarray::{s, Array2, ArrayView2};

use wideboost::beta::{BetaKind, BetaMatrix, BetaSpec};
use wideboost::booster::{self, BoostParams, Ensemble};
use wideboost::dataset::{load_csv, parse_csv, Dataset, LabelSpec, SplitSpec, Task};
use wideboost::harness::{synthetic, Benchmark};
use wideboost::objective::{LossKind, WideObjective};
use wideboost::rng::{self, WideRng};
use wideboost::tree::{fit_tree, Node, Tree, TreeParams, GAIN_TIE_TOLERANCE, HESS_FLOOR};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data").join(name)
}

pub fn digits() -> Dataset {
    load_csv(data_path("optdigits.csv"), &LabelSpec::Last, Task::Multiclass, false).unwrap()
}

pub fn split() -> SplitSpec {
    SplitSpec::new(0.2, 0)
}

pub fn digits_bench() -> Benchmark {
    Benchmark::split("digits", &digits(), &split()).unwrap()
}

pub fn titanic_bench() -> Benchmark {
    let text = synthetic::titanic_csv(891, 11);
    let data = parse_csv(text.as_bytes(), &LabelSpec::Name("Survived".into()), Task::Binary, true).unwrap();
    Benchmark::split("titanic-format", &data, &split()).unwrap()
}

pub fn adult_bench() -> Benchmark {
    let text = synthetic::adult_csv(3000, 12);
    let data = parse_csv(text.as_bytes(), &LabelSpec::Name("income".into()), Task::Binary, true).unwrap();
    Benchmark::split("adult-format", &data, &split()).unwrap()
}

pub fn uniform(gen: &mut WideRng, lo: f64, hi: f64) -> f64 {
    rng::uniform_range(gen, lo, hi)
}

/// Labels of the right form for `loss`: real values, 0/1, or one-hot rows.
pub fn random_labels(gen: &mut WideRng, loss: LossKind, n: usize, d: usize) -> Array2<f64> {
    let mut y = Array2::zeros((n, d));
    for i in 0..n {
        match loss {
            LossKind::SquaredError => y[[i, 0]] = uniform(gen, -2.0, 2.0),
            LossKind::BinaryLogloss => y[[i, 0]] = rng::uniform_int(gen, 0, 1) as f64,
            LossKind::MulticlassLogloss => y[[i, rng::uniform_int(gen, 0, d - 1)]] = 1.0,
        }
    }
    y
}

pub fn random_matrix(gen: &mut WideRng, n: usize, m: usize, lo: f64, hi: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, m), |_| uniform(gen, lo, hi))
}

/// A random gradient-check instance: `(objective, Y, F)`.
pub struct FdInstance {
    pub objective: WideObjective,
    pub y: Array2<f64>,
    pub f: Array2<f64>,
}

pub fn fd_instance(gen: &mut WideRng, loss: LossKind, kind: BetaKind) -> FdInstance {
    let n = rng::uniform_int(gen, 1, 8);
    let d = match loss {
        LossKind::MulticlassLogloss => rng::uniform_int(gen, 2, 5),
        LossKind::SquaredError | LossKind::BinaryLogloss => 1,
    };
    let q_min = if matches!(kind, BetaKind::I | BetaKind::IN) { d } else { 1 };
    let q = rng::uniform_int(gen, q_min, 6);
    let beta = BetaMatrix::build(BetaSpec::new(kind, q, d, gen_seed(gen))).unwrap();
    FdInstance {
        objective: WideObjective::new(loss, beta).unwrap(),
        y: random_labels(gen, loss, n, d),
        f: random_matrix(gen, n, q, -2.0, 2.0),
    }
}

fn gen_seed(gen: &mut WideRng) -> u64 {
    rand::RngCore::next_u64(gen)
}

/// Worst violation of the finite-difference check, as a ratio of the allowed
/// error (≤ 1 passes), for the gradient and the diagonal hessian.
pub fn fd_violation(inst: &FdInstance) -> (f64, f64) {
    let gh = inst.objective.grad_hess(inst.y.view(), inst.f.view()).unwrap();
    let (n, q) = inst.f.dim();
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..n {
        let y = inst.y.slice(s![i..i + 1, ..]);
        let row_loss = |f: &Array2<f64>| inst.objective.loss_value(y, f.view()).unwrap();
        for j in 0..q {
            let at = |delta: f64| {
                let mut f = inst.f.slice(s![i..i + 1, ..]).to_owned();
                f[[0, j]] += delta;
                row_loss(&f)
            };
            let hg = 1e-5;
            let g_fd = (at(hg) - at(-hg)) / (2.0 * hg);
            let hh = 1e-4;
            let h_fd = (at(hh) - 2.0 * at(0.0) + at(-hh)) / (hh * hh);
            let g = gh.grad[[i, j]];
            let h = gh.hess[[i, j]];
            worst.0 = worst.0.max((g - g_fd).abs() / (1e-4 * g.abs()).max(1e-6));
            worst.1 = worst.1.max((h - h_fd).abs() / (1e-3 * h.abs()).max(1e-5));
        }
    }
    worst
}

/// A tree grown by trying every (feature, threshold) pair at every node.
#[derive(Debug, Clone, PartialEq)]
pub enum BruteTree {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: Box<BruteTree>,
        right: Box<BruteTree>,
    },
}

impl BruteTree {
    pub fn total_gain(&self) -> f64 {
        match self {
            BruteTree::Leaf(_) => 0.0,
            BruteTree::Split { gain, left, right, .. } => gain + left.total_gain() + right.total_gain(),
        }
    }

    /// `−½ Σ_leaves G²/(H+λ) + γ·T`, the regularized objective of the fitted
    /// structure.
    pub fn structure_score(&self, rows: &[usize], x: ArrayView2<'_, f64>, g: &[f64], h: &[f64], p: &TreeParams) -> f64 {
        match self {
            BruteTree::Leaf(_) => {
                let gs: f64 = rows.iter().map(|&r| g[r]).sum();
                let hs: f64 = rows.iter().map(|&r| h[r].max(HESS_FLOOR)).sum();
                -0.5 * gs * gs / (hs + p.lambda) + p.gamma
            }
            BruteTree::Split { feature, threshold, left, right, .. } => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[[i, *feature]] < *threshold);
                left.structure_score(&l, x, g, h, p) + right.structure_score(&r, x, g, h, p)
            }
        }
    }
}

pub fn brute_force_tree(x: ArrayView2<'_, f64>, g: &[f64], h: &[f64], p: &TreeParams) -> BruteTree {
    let rows: Vec<usize> = (0..x.nrows()).collect();
    brute_node(x, g, h, p, &rows, 0)
}

fn brute_node(x: ArrayView2<'_, f64>, g: &[f64], h: &[f64], p: &TreeParams, rows: &[usize], depth: usize) -> BruteTree {
    let hf = |r: usize| h[r].max(HESS_FLOOR);
    let gs: f64 = rows.iter().map(|&r| g[r]).sum();
    let hs: f64 = rows.iter().map(|&r| hf(r)).sum();
    let leaf = BruteTree::Leaf(-gs / (hs + p.lambda));
    if depth >= p.max_depth {
        return leaf;
    }
    let mut best: Option<(f64, usize, f64)> = None;
    for feature in 0..x.ncols() {
        let mut values: Vec<f64> = rows.iter().map(|&r| x[[r, feature]]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let threshold = wideboost::tree::split_threshold(w[0], w[1]);
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[[i, feature]] < threshold);
            let (gl, hl) = (l.iter().map(|&i| g[i]).sum::<f64>(), l.iter().map(|&i| hf(i)).sum::<f64>());
            let (gr, hr) = (r.iter().map(|&i| g[i]).sum::<f64>(), r.iter().map(|&i| hf(i)).sum::<f64>());
            if hl < p.min_child_weight
                || hr < p.min_child_weight
                || l.len() < p.min_samples_leaf
                || r.len() < p.min_samples_leaf
            {
                continue;
            }
            let gain = p.split_gain(gl, hl, gr, hr);
            if gain > 0.0 && best.is_none_or(|b| gain > b.0 + GAIN_TIE_TOLERANCE) {
                best = Some((gain, feature, threshold));
            }
        }
    }
    match best {
        None => leaf,
        Some((gain, feature, threshold)) => {
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[[i, feature]] < threshold);
            BruteTree::Split {
                feature,
                threshold,
                gain,
                left: Box::new(brute_node(x, g, h, p, &l, depth + 1)),
                right: Box::new(brute_node(x, g, h, p, &r, depth + 1)),
            }
        }
    }
}

/// Converts a fitted tree to the recursive form for comparison.
pub fn to_brute(tree: &Tree) -> BruteTree {
    fn walk(nodes: &[Node], i: usize) -> BruteTree {
        match &nodes[i] {
            Node::Leaf { leaf } => BruteTree::Leaf(*leaf),
            Node::Split { feature, threshold, left, right, gain } => BruteTree::Split {
                feature: *feature,
                threshold: *threshold,
                gain: *gain,
                left: Box::new(walk(nodes, *left)),
                right: Box::new(walk(nodes, *right)),
            },
        }
    }
    walk(tree.nodes(), 0)
}

/// A tree-oracle instance on a dyadic grid, so every sum is exact and the
/// comparison can be bitwise.
pub struct TreeInstance {
    pub x: Array2<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub params: TreeParams,
}

pub fn tree_instance(gen: &mut WideRng) -> TreeInstance {
    let n = rng::uniform_int(gen, 2, 25);
    let p = rng::uniform_int(gen, 1, 4);
    let levels = rng::uniform_int(gen, 2, 8);
    let x = Array2::from_shape_fn((n, p), |_| rng::uniform_int(gen, 0, levels) as f64 * 0.5);
    let g = (0..n).map(|_| (rng::uniform_int(gen, 0, 64) as f64 - 32.0) / 8.0).collect();
    let h = (0..n).map(|_| rng::uniform_int(gen, 1, 16) as f64 / 8.0).collect();
    let params = TreeParams {
        max_depth: rng::uniform_int(gen, 1, 2),
        min_child_weight: rng::uniform_int(gen, 0, 2) as f64 * 0.5,
        lambda: rng::uniform_int(gen, 0, 4) as f64 * 0.5,
        gamma: rng::uniform_int(gen, 0, 2) as f64 * 0.25,
        min_samples_leaf: rng::uniform_int(gen, 1, 2),
    };
    TreeInstance { x, g, h, params }
}

pub fn fit_instance(inst: &TreeInstance) -> Tree {
    fit_tree(inst.x.view(), &inst.g, &inst.h, &inst.params).unwrap()
}

/// Standard boosting with the textbook objective on the raw scores:
/// `g = P − Y` with `h = 1`, `P(1−P)`, or the softmax diagonal `P_k(1−P_k)`.
/// Returns the scores after each round.
pub fn reference_path(data: &Dataset, loss: LossKind, rounds: usize, eta: f64, tree: &TreeParams) -> Vec<Array2<f64>> {
    let x = data.features().view();
    let y = data.labels();
    let (n, d) = y.dim();
    let mut f = Array2::<f64>::zeros((n, d));
    let mut path = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let mut g = Array2::<f64>::zeros((n, d));
        let mut h = Array2::<f64>::zeros((n, d));
        for i in 0..n {
            match loss {
                LossKind::SquaredError => {
                    for k in 0..d {
                        g[[i, k]] = f[[i, k]] - y[[i, k]];
                        h[[i, k]] = 1.0;
                    }
                }
                LossKind::BinaryLogloss => {
                    let p = 1.0 / (1.0 + (-f[[i, 0]]).exp());
                    g[[i, 0]] = p - y[[i, 0]];
                    h[[i, 0]] = p * (1.0 - p);
                }
                LossKind::MulticlassLogloss => {
                    let m = f.row(i).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                    let e: Vec<f64> = f.row(i).iter().map(|v| (v - m).exp()).collect();
                    let z: f64 = e.iter().sum();
                    for k in 0..d {
                        let p = e[k] / z;
                        g[[i, k]] = p - y[[i, k]];
                        h[[i, k]] = p * (1.0 - p);
                    }
                }
            }
        }
        let mut next = f.clone();
        for k in 0..d {
            let t = fit_tree(x, &g.column(k).to_vec(), &h.column(k).to_vec(), tree).unwrap();
            let pred = t.predict(x).unwrap();
            for i in 0..n {
                next[[i, k]] += eta * pred[i];
            }
        }
        f = next;
        path.push(f.clone());
    }
    path
}

/// Scores `F_r·β` of a trained model after each round `r`.
pub fn staged_scores(model: &Ensemble, x: ArrayView2<'_, f64>) -> Vec<Array2<f64>> {
    let eta = model.params().learning_rate;
    let mut f = Array2::from_elem((x.nrows(), model.width()), model.base_score());
    model
        .trees()
        .iter()
        .map(|round| {
            for (j, t) in round.iter().enumerate() {
                let pred = t.predict(x).unwrap();
                for i in 0..x.nrows() {
                    f[[i, j]] += eta * pred[i];
                }
            }
            model.beta().widen(f.view()).unwrap()
        })
        .collect()
}

pub fn reduction_dataset(loss: LossKind, seed: u64) -> Dataset {
    let mut gen = rng::seeded(seed);
    let (n, p) = (150, 5);
    let d = if loss == LossKind::MulticlassLogloss { 4 } else { 1 };
    let x = random_matrix(&mut gen, n, p, -1.0, 1.0);
    let mut y = Array2::zeros((n, d));
    for i in 0..n {
        let a = x[[i, 0]] + 0.5 * x[[i, 1]] * x[[i, 2]] + 0.2 * uniform(&mut gen, -1.0, 1.0);
        match loss {
            LossKind::SquaredError => y[[i, 0]] = a + x[[i, 3]] - x[[i, 4]].abs(),
            LossKind::BinaryLogloss => y[[i, 0]] = f64::from(u8::from(a > 0.0)),
            LossKind::MulticlassLogloss => {
                let k = ((a + 1.5) / 3.0 * d as f64).clamp(0.0, d as f64 - 1.0) as usize;
                y[[i, k]] = 1.0;
            }
        }
    }
    Dataset::new(x, y, loss.task()).unwrap()
}

/// Largest absolute difference between the wide path with `q = d`, `β = I`
/// and the reference path, over every round.
pub fn reduction_gap(loss: LossKind, seed: u64, rounds: usize) -> (f64, Vec<f64>) {
    let data = reduction_dataset(loss, seed);
    let mut params = BoostParams::standard(loss, data.label_dim());
    params.rounds = rounds;
    params.tree.max_depth = 3;
    let (model, trace) = booster::train(&data, &params, None).unwrap();
    let wide = staged_scores(&model, data.features().view());
    let reference = reference_path(&data, loss, rounds, params.learning_rate, &params.tree);
    let gap = wide
        .iter()
        .zip(&reference)
        .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max);
    (gap, trace.train_loss)
}

pub fn non_increasing(losses: &[f64]) -> bool {
    losses.windows(2).all(|w| w[1] <= w[0])
}

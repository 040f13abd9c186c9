//! Single-output regression trees fitted to one gradient/hessian column with
//! exact greedy split search and regularized Newton leaf values.

use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hessians are floored at this value when fitting leaves.
pub const HESS_FLOOR: f64 = 1e-16;

/// Gains closer than this are treated as tied.
pub const GAIN_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Minimum hessian sum in each child.
    pub min_child_weight: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    /// Minimum gain for a split to be kept.
    pub gamma: f64,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 6,
            min_child_weight: 1.0,
            lambda: 1.0,
            gamma: 0.0,
            min_samples_leaf: 1,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::InvalidParam("max_depth must be >= 1".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::InvalidParam("min_samples_leaf must be >= 1".into()));
        }
        for (name, v) in [
            ("min_child_weight", self.min_child_weight),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Leaf value `−G / (H + λ)`.
    pub fn leaf_value(&self, g: f64, h: f64) -> f64 {
        -g / (h + self.lambda)
    }

    /// Split gain `½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ`.
    pub fn split_gain(&self, gl: f64, hl: f64, gr: f64, hr: f64) -> f64 {
        let score = |g: f64, h: f64| g * g / (h + self.lambda);
        0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr)) - self.gamma
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        gain: f64,
    },
    Leaf {
        leaf: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { leaf: value }],
        }
    }

    /// Builds a tree from a node array (root at 0) after checking that it is
    /// well formed.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        let tree = Tree { nodes };
        tree.validate(None)?;
        Ok(tree)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Depth of the deepest leaf; a single leaf has depth 0.
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((idx, depth)) = stack.pop() {
            max = max.max(depth);
            if let Node::Split { left, right, .. } = self.nodes[idx] {
                stack.push((left, depth + 1));
                stack.push((right, depth + 1));
            }
        }
        max
    }

    /// Sum of the gains of every split.
    pub fn total_gain(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| match n {
                Node::Split { gain, .. } => *gain,
                Node::Leaf { .. } => 0.0,
            })
            .sum()
    }

    /// Checks that the nodes form a binary tree rooted at 0 with finite leaves
    /// and, when `n_features` is given, in-range split features.
    pub fn validate(&self, n_features: Option<usize>) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::MalformedTree("tree has no nodes".into()));
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (idx, node) in self.nodes.iter().enumerate() {
            match *node {
                Node::Leaf { leaf } if !leaf.is_finite() => {
                    return Err(Error::MalformedTree(format!("leaf {idx} is not finite")))
                }
                Node::Leaf { .. } => {}
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    if !threshold.is_finite() {
                        return Err(Error::MalformedTree(format!("node {idx} threshold not finite")));
                    }
                    if let Some(p) = n_features {
                        if feature >= p {
                            return Err(Error::MalformedTree(format!(
                                "node {idx} splits on feature {feature}, input has {p}"
                            )));
                        }
                    }
                    for child in [left, right] {
                        // children always follow their parent, which rules out cycles
                        if child <= idx || child >= self.nodes.len() {
                            return Err(Error::MalformedTree(format!(
                                "node {idx} has invalid child {child}"
                            )));
                        }
                        parents[child] += 1;
                    }
                    if left == right {
                        return Err(Error::MalformedTree(format!("node {idx} has identical children")));
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&c| c != 1) {
            return Err(Error::MalformedTree("nodes do not form a single tree".into()));
        }
        Ok(())
    }

    /// Leaf value reached by `row`; `x[feature] < threshold` goes left.
    #[inline]
    pub(crate) fn predict_row(&self, row: impl Fn(usize) -> f64) -> f64 {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                Node::Leaf { leaf } => return leaf,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => idx = if row(feature) < threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        predict_tree(self, x)
    }
}

/// Scores every row of `x`.
pub fn predict_tree(tree: &Tree, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    tree.validate(Some(x.ncols()))?;
    if let Some(((i, j), _)) = x.indexed_iter().find(|(_, v)| v.is_nan()) {
        return Err(Error::InvalidInput(format!("NaN feature at row {i}, column {j}")));
    }
    Ok(x.rows()
        .into_iter()
        .map(|row| tree.predict_row(|f| row[f]))
        .collect())
}

/// Midpoint of two consecutive distinct values, nudged so that `lo` stays
/// strictly left of it.
pub fn split_threshold(lo: f64, hi: f64) -> f64 {
    let mid = lo / 2.0 + hi / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}

/// Per-feature row orderings, sorted by value (ties by row index). Built once
/// per training matrix and shared by every tree fitted on it.
#[derive(Clone, Debug)]
pub struct SortedFeatures {
    n_rows: usize,
    order: Vec<Vec<u32>>,
    values: Vec<Vec<f64>>,
}

impl SortedFeatures {
    pub fn new(x: ArrayView2<'_, f64>) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || p == 0 {
            return Err(Error::Empty("feature matrix".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidInput("too many rows".into()));
        }
        if let Some(((i, j), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite feature at row {i}, column {j}")));
        }
        let mut order = Vec::with_capacity(p);
        let mut values = Vec::with_capacity(p);
        for col in x.columns() {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
            values.push(idx.iter().map(|&r| col[r as usize]).collect());
            order.push(idx);
        }
        Ok(SortedFeatures {
            n_rows: n,
            order,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.order.len()
    }
}

#[derive(Clone, Copy)]
struct OpenNode {
    tree_idx: usize,
    g: f64,
    h: f64,
    count: usize,
}

#[derive(Clone, Copy)]
struct Scan {
    gl: f64,
    hl: f64,
    nl: usize,
    last: f64,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    gl: f64,
    hl: f64,
    nl: usize,
}

/// Fits one tree to `(grad, hess)` over the rows of `x`.
pub fn fit_tree(
    x: ArrayView2<'_, f64>,
    grad: &[f64],
    hess: &[f64],
    params: &TreeParams,
) -> Result<Tree> {
    let sorted = SortedFeatures::new(x)?;
    fit_tree_sorted(&sorted, x, grad, hess, params)
}

/// [`fit_tree`] with a precomputed [`SortedFeatures`] for `x`.
///
/// Growth is level-wise. At every level each feature's sorted order is
/// scanned once, accumulating left-side sums for all open nodes at the same
/// time; a candidate is scored wherever the value changes within a node.
/// Candidates are visited by ascending feature then ascending threshold and
/// replace the incumbent only when better by more than
/// [`GAIN_TIE_TOLERANCE`].
pub fn fit_tree_sorted(
    sorted: &SortedFeatures,
    x: ArrayView2<'_, f64>,
    grad: &[f64],
    hess: &[f64],
    params: &TreeParams,
) -> Result<Tree> {
    params.validate()?;
    let n = sorted.n_rows();
    if n == 0 {
        return Err(Error::Empty("no rows to fit".into()));
    }
    if x.dim() != (n, sorted.n_features()) {
        return Err(Error::Dimension("sorted index does not match feature matrix".into()));
    }
    if grad.len() != n || hess.len() != n {
        return Err(Error::Dimension(format!(
            "{n} rows but {} gradients and {} hessians",
            grad.len(),
            hess.len()
        )));
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite gradient at row {i}")));
    }
    if let Some(i) = hess.iter().position(|h| !h.is_finite() || *h < 0.0) {
        return Err(Error::InvalidInput(format!(
            "hessian at row {i} is {}, must be finite and >= 0",
            hess[i]
        )));
    }
    let hess: Vec<f64> = hess.iter().map(|&h| h.max(HESS_FLOOR)).collect();

    let mut nodes: Vec<Node> = vec![Node::Leaf { leaf: 0.0 }];
    // index into `open` for rows still in a splittable node, -1 otherwise
    let mut slot: Vec<i32> = vec![0; n];
    let mut open = vec![OpenNode {
        tree_idx: 0,
        g: grad.iter().sum(),
        h: hess.iter().sum(),
        count: n,
    }];

    for depth in 0..=params.max_depth {
        if open.is_empty() {
            break;
        }
        let can_split: Vec<bool> = open
            .iter()
            .map(|o| {
                depth < params.max_depth
                    && o.count >= 2 * params.min_samples_leaf
                    && o.h >= 2.0 * params.min_child_weight
            })
            .collect();

        let mut best: Vec<Option<Candidate>> = vec![None; open.len()];
        if can_split.iter().any(|&c| c) {
            let fresh = Scan {
                gl: 0.0,
                hl: 0.0,
                nl: 0,
                last: f64::NAN,
            };
            let mut scans = vec![fresh; open.len()];
            for (feature, (order, values)) in sorted.order.iter().zip(&sorted.values).enumerate() {
                scans.iter_mut().for_each(|s| *s = fresh);
                for (&row, &v) in order.iter().zip(values) {
                    let s = slot[row as usize];
                    if s < 0 || !can_split[s as usize] {
                        continue;
                    }
                    let s = s as usize;
                    let scan = &mut scans[s];
                    if scan.nl > 0 && v > scan.last {
                        let node = &open[s];
                        let (gl, hl, nl) = (scan.gl, scan.hl, scan.nl);
                        let (gr, hr, nr) = (node.g - gl, node.h - hl, node.count - nl);
                        if nl >= params.min_samples_leaf
                            && nr >= params.min_samples_leaf
                            && hl >= params.min_child_weight
                            && hr >= params.min_child_weight
                        {
                            let gain = params.split_gain(gl, hl, gr, hr);
                            let better = match &best[s] {
                                None => true,
                                Some(b) => gain > b.gain + GAIN_TIE_TOLERANCE,
                            };
                            if better {
                                best[s] = Some(Candidate {
                                    gain,
                                    feature,
                                    threshold: split_threshold(scan.last, v),
                                    gl,
                                    hl,
                                    nl,
                                });
                            }
                        }
                    }
                    scan.gl += grad[row as usize];
                    scan.hl += hess[row as usize];
                    scan.nl += 1;
                    scan.last = v;
                }
            }
        }

        let mut next: Vec<OpenNode> = Vec::new();
        // open slot -> (left slot, right slot, feature, threshold)
        let mut routes: Vec<Option<(i32, i32, usize, f64)>> = vec![None; open.len()];
        for (s, node) in open.iter().enumerate() {
            match best[s].filter(|c| c.gain > 0.0) {
                Some(c) => {
                    let left = nodes.len();
                    let right = left + 1;
                    let (gr, hr) = (node.g - c.gl, node.h - c.hl);
                    nodes.push(Node::Leaf {
                        leaf: params.leaf_value(c.gl, c.hl),
                    });
                    nodes.push(Node::Leaf {
                        leaf: params.leaf_value(gr, hr),
                    });
                    nodes[node.tree_idx] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left,
                        right,
                        gain: c.gain,
                    };
                    let ls = next.len() as i32;
                    next.push(OpenNode {
                        tree_idx: left,
                        g: c.gl,
                        h: c.hl,
                        count: c.nl,
                    });
                    next.push(OpenNode {
                        tree_idx: right,
                        g: gr,
                        h: hr,
                        count: node.count - c.nl,
                    });
                    routes[s] = Some((ls, ls + 1, c.feature, c.threshold));
                }
                None => {
                    nodes[node.tree_idx] = Node::Leaf {
                        leaf: params.leaf_value(node.g, node.h),
                    };
                }
            }
        }
        for (row, s) in slot.iter_mut().enumerate() {
            if *s < 0 {
                continue;
            }
            *s = match routes[*s as usize] {
                Some((l, r, f, t)) => {
                    if x[[row, f]] < t {
                        l
                    } else {
                        r
                    }
                }
                None => -1,
            };
        }
        open = next;
    }

    let tree = Tree { nodes };
    if let Some(Node::Leaf { leaf }) = tree.nodes.iter().find(|n| matches!(n, Node::Leaf { leaf } if !leaf.is_finite())) {
        return Err(Error::InvalidInput(format!("leaf value {leaf} is not finite")));
    }
    Ok(tree)
}

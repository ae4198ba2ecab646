use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{Matrix, MlError, WindowedDataset};
use crate::datagen::SimRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub max_depth: usize,
    /// Minimum number of samples in each child of a split.
    pub min_leaf: usize,
}

impl TreeSpec {
    pub fn validate(&self) -> Result<(), MlError> {
        if self.min_leaf == 0 {
            return Err(MlError::InvalidParameter("min_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf { value: Vec<f64> },
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    /// Node arena; the root is node 0.
    pub nodes: Vec<Node>,
}

impl TreeModel {
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

pub fn fit_tree(ds: &WindowedDataset, spec: &TreeSpec) -> Result<TreeModel, MlError> {
    spec.validate()?;
    let rows: Vec<usize> = (0..ds.len()).collect();
    Ok(build(&ds.x, &ds.y, rows, spec, None))
}

pub fn predict_tree(model: &TreeModel, x: &[f64]) -> Vec<f64> {
    let mut i = 0;
    loop {
        match &model.nodes[i] {
            Node::Leaf { value } => return value.clone(),
            Node::Split { feature, threshold, left, right } => {
                i = if x[*feature] <= *threshold { *left } else { *right };
            }
        }
    }
}

/// Random feature subsets for forest trees.
pub(crate) struct FeatureSampler<'a> {
    pub count: usize,
    pub rng: &'a mut SimRng,
}

/// Grow a tree on `rows` (which may repeat, for bootstrap samples).
pub(crate) fn build(
    x: &Matrix,
    y: &Matrix,
    rows: Vec<usize>,
    spec: &TreeSpec,
    mut sampler: Option<FeatureSampler<'_>>,
) -> TreeModel {
    let mut nodes = Vec::new();
    grow(x, y, rows, 0, spec, &mut sampler, &mut nodes);
    TreeModel { nodes }
}

fn grow(
    x: &Matrix,
    y: &Matrix,
    rows: Vec<usize>,
    depth: usize,
    spec: &TreeSpec,
    sampler: &mut Option<FeatureSampler<'_>>,
    nodes: &mut Vec<Node>,
) -> usize {
    let id = nodes.len();
    let pure = rows.iter().all(|&r| y.row(r) == y.row(rows[0]));
    let value = if pure { y.row(rows[0]).to_vec() } else { mean_target(y, &rows) };
    nodes.push(Node::Leaf { value });
    if depth >= spec.max_depth || rows.len() < 2 * spec.min_leaf || pure {
        return id;
    }
    let features: Vec<usize> = match sampler {
        Some(s) => {
            let mut f = sample(s.rng, x.cols(), s.count).into_vec();
            f.sort_unstable();
            f
        }
        None => (0..x.cols()).collect(),
    };
    let Some((feature, threshold)) = best_split(x, y, &rows, &features, spec.min_leaf) else {
        return id;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x.get(i, feature) <= threshold);
    let left = grow(x, y, l, depth + 1, spec, sampler, nodes);
    let right = grow(x, y, r, depth + 1, spec, sampler, nodes);
    nodes[id] = Node::Split { feature, threshold, left, right };
    id
}

fn mean_target(y: &Matrix, rows: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; y.cols()];
    for &r in rows {
        m.iter_mut().zip(y.row(r)).for_each(|(a, v)| *a += v);
    }
    m.iter_mut().for_each(|a| *a /= rows.len() as f64);
    m
}

/// SSE of a group from its per-output sums and sums of squares.
fn sse(sum: &[f64], sumsq: &[f64], n: f64) -> f64 {
    sum.iter().zip(sumsq).map(|(s, q)| q - s * s / n).sum()
}

/// Lowest summed-SSE split over `features`; the first candidate wins ties.
/// Returns `None` when no split reduces the parent SSE.
fn best_split(x: &Matrix, y: &Matrix, rows: &[usize], features: &[usize], min_leaf: usize) -> Option<(usize, f64)> {
    let q = y.cols();
    let n = rows.len();
    let mut total = vec![0.0; q];
    let mut total_sq = vec![0.0; q];
    for &r in rows {
        for (j, v) in y.row(r).iter().enumerate() {
            total[j] += v;
            total_sq[j] += v * v;
        }
    }
    let parent = sse(&total, &total_sq, n as f64);
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order = rows.to_vec();
    let mut left = vec![0.0; q];
    let mut left_sq = vec![0.0; q];
    let mut right = vec![0.0; q];
    let mut right_sq = vec![0.0; q];
    for &f in features {
        order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)).then(a.cmp(&b)));
        left.iter_mut().for_each(|v| *v = 0.0);
        left_sq.iter_mut().for_each(|v| *v = 0.0);
        for (pos, &r) in order.iter().enumerate().take(n - 1) {
            for (j, v) in y.row(r).iter().enumerate() {
                left[j] += v;
                left_sq[j] += v * v;
            }
            let n_left = pos + 1;
            if n_left < min_leaf || n - n_left < min_leaf {
                continue;
            }
            let (lo, hi) = (x.get(r, f), x.get(order[pos + 1], f));
            if lo == hi {
                continue;
            }
            for j in 0..q {
                right[j] = total[j] - left[j];
                right_sq[j] = total_sq[j] - left_sq[j];
            }
            let score = sse(&left, &left_sq, n_left as f64) + sse(&right, &right_sq, (n - n_left) as f64);
            if best.is_none_or(|b| score < b.0) {
                let mut threshold = 0.5 * (lo + hi);
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some((score, f, threshold));
            }
        }
    }
    best.filter(|b| b.0 < parent).map(|b| (b.1, b.2))
}

//! CART classification trees grown on Gini impurity.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{check_width, ModelError};
use crate::dataset::Dataset;
use crate::rng::Rng;

/// Splits must lower impurity by more than this to count as a decrease.
pub const MIN_GAIN: f64 = 1e-12;

/// `1 - sum(p_c^2)` over a class histogram.
pub fn gini_impurity(counts: &[usize]) -> Result<f64, ModelError> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(ModelError::EmptyHistogram);
    }
    let n = n as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_impurity_decrease: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_impurity_decrease: 0.0,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.min_samples_split < 2 {
            return Err(ModelError::InvalidParams("min_samples_split must be >= 2".into()));
        }
        if !(self.min_impurity_decrease >= 0.0) {
            return Err(ModelError::InvalidParams("min_impurity_decrease must be >= 0".into()));
        }
        Ok(())
    }
}

/// Rows go left iff `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        n_samples: usize,
        impurity_decrease: f64,
    },
    Leaf {
        class: usize,
        histogram: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    pub params: TreeParams,
    pub n_cols: usize,
    pub n_classes: usize,
    /// Flat node arena; the root is node 0.
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub impurity_decrease: f64,
}

/// Borrowed training matrix.
#[derive(Clone, Copy)]
pub(crate) struct View<'a> {
    pub x: &'a [f64],
    pub n_cols: usize,
    pub y: &'a [usize],
    pub n_classes: usize,
}

impl<'a> View<'a> {
    pub fn of(ds: &'a Dataset) -> Self {
        Self {
            x: ds.x(),
            n_cols: ds.n_cols(),
            y: ds.y(),
            n_classes: ds.n_classes(),
        }
    }

    #[inline]
    fn at(&self, row: usize, col: usize) -> f64 {
        self.x[row * self.n_cols + col]
    }
}

fn argmax_lowest(values: impl IntoIterator<Item = usize>) -> usize {
    let mut best = 0;
    let mut best_v = None;
    for (i, v) in values.into_iter().enumerate() {
        if best_v.is_none_or(|b| v > b) {
            best = i;
            best_v = Some(v);
        }
    }
    best
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    if m < b {
        m
    } else {
        a
    }
}

/// Best threshold on one feature as `(threshold, decrease)`, ties to the
/// lower threshold.
fn best_threshold(
    view: &View,
    rows: &[usize],
    feature: usize,
    parent: &[usize],
    scratch: &mut Vec<(f64, usize)>,
) -> Option<(f64, f64)> {
    scratch.clear();
    scratch.extend(rows.iter().map(|&r| (view.at(r, feature), view.y[r])));
    scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let n = rows.len() as f64;
    let sum_sq = |h: &[usize]| h.iter().map(|&c| (c * c) as f64).sum::<f64>();
    let parent_term = sum_sq(parent) / (n * n);
    let mut left = vec![0usize; parent.len()];
    let mut right = parent.to_vec();
    let mut sl = 0.0;
    let mut sr = sum_sq(parent);

    let mut best: Option<(f64, f64)> = None;
    for i in 0..scratch.len() - 1 {
        let c = scratch[i].1;
        sl += (2 * left[c] + 1) as f64;
        sr -= (2 * right[c] - 1) as f64;
        left[c] += 1;
        right[c] -= 1;
        let (v, next) = (scratch[i].0, scratch[i + 1].0);
        if v == next {
            continue;
        }
        let nl = (i + 1) as f64;
        let nr = n - nl;
        let decrease = (sl / nl + sr / nr) / n - parent_term;
        if best.is_none_or(|(_, d)| decrease > d + MIN_GAIN) {
            best = Some((midpoint(v, next), decrease));
        }
    }
    best
}

fn histogram(view: &View, rows: &[usize]) -> Vec<usize> {
    let mut h = vec![0; view.n_classes];
    for &r in rows {
        h[view.y[r]] += 1;
    }
    h
}

fn best_split_in(
    view: &View,
    rows: &[usize],
    features: &[usize],
    parent: &[usize],
    scratch: &mut Vec<(f64, usize)>,
) -> Option<Split> {
    if rows.len() < 2 {
        return None;
    }
    let mut best: Option<Split> = None;
    for &f in features {
        if let Some((threshold, decrease)) = best_threshold(view, rows, f, parent, scratch) {
            if decrease > MIN_GAIN && best.is_none_or(|b| decrease > b.impurity_decrease + MIN_GAIN)
            {
                best = Some(Split {
                    feature: f,
                    threshold,
                    impurity_decrease: decrease,
                });
            }
        }
    }
    best
}

/// The split over `features` (evaluated in ascending index order) that most
/// lowers weighted Gini impurity among `rows`. Thresholds are midpoints of
/// consecutive distinct values; ties go to the lower feature, then the lower
/// threshold. `None` when no split lowers impurity.
pub fn best_split(ds: &Dataset, rows: &[usize], features: &[usize]) -> Option<Split> {
    let view = View::of(ds);
    let mut feats = features.to_vec();
    feats.sort_unstable();
    feats.dedup();
    let parent = histogram(&view, rows);
    best_split_in(&view, rows, &feats, &parent, &mut Vec::new())
}

/// How candidate features are chosen at each node.
pub(crate) enum FeatureChoice<'r> {
    All,
    /// Draw features in random order until `per_split` of them vary within
    /// the node; constant features do not use up the budget.
    Random { per_split: usize, rng: &'r mut Rng },
}

fn varies(view: &View, rows: &[usize], f: usize) -> bool {
    let first = view.at(rows[0], f);
    rows.iter().any(|&r| view.at(r, f) != first)
}

pub(crate) fn grow(
    view: &View,
    mut rows: Vec<usize>,
    params: &TreeParams,
    mut choice: FeatureChoice,
) -> DecisionTreeModel {
    let all: Vec<usize> = (0..view.n_cols).collect();
    let mut order = all.clone();
    let mut candidates = Vec::with_capacity(view.n_cols);
    let mut scratch = Vec::with_capacity(rows.len());
    let mut nodes = vec![TreeNode::Leaf {
        class: 0,
        histogram: Vec::new(),
    }];
    let mut stack = vec![(0usize, 0usize, rows.len(), 0usize)];

    while let Some((id, lo, hi, depth)) = stack.pop() {
        let node_rows = &mut rows[lo..hi];
        let hist = histogram(view, node_rows);
        let leaf = |hist: Vec<usize>| TreeNode::Leaf {
            class: argmax_lowest(hist.iter().copied()),
            histogram: hist,
        };
        let pure = hist.iter().filter(|&&c| c > 0).count() <= 1;
        if pure
            || node_rows.len() < params.min_samples_split
            || params.max_depth.is_some_and(|d| depth >= d)
        {
            nodes[id] = leaf(hist);
            continue;
        }

        let features: &[usize] = match &mut choice {
            FeatureChoice::All => &all,
            FeatureChoice::Random { per_split, rng } => {
                order.shuffle(*rng);
                candidates.clear();
                for &f in &order {
                    if candidates.len() == *per_split {
                        break;
                    }
                    if varies(view, node_rows, f) {
                        candidates.push(f);
                    }
                }
                candidates.sort_unstable();
                &candidates
            }
        };
        let split = best_split_in(view, node_rows, features, &hist, &mut scratch)
            .filter(|s| s.impurity_decrease >= params.min_impurity_decrease);
        let Some(split) = split else {
            nodes[id] = leaf(hist);
            continue;
        };

        let mut mid = 0;
        for i in 0..node_rows.len() {
            if view.at(node_rows[i], split.feature) <= split.threshold {
                node_rows.swap(i, mid);
                mid += 1;
            }
        }
        let left = nodes.len();
        let right = left + 1;
        nodes.push(leaf(Vec::new()));
        nodes.push(leaf(Vec::new()));
        nodes[id] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
            n_samples: hi - lo,
            impurity_decrease: split.impurity_decrease,
        };
        stack.push((right, lo + mid, hi, depth + 1));
        stack.push((left, lo, lo + mid, depth + 1));
    }

    DecisionTreeModel {
        params: *params,
        n_cols: view.n_cols,
        n_classes: view.n_classes,
        nodes,
    }
}

/// Grows an unpruned (by default) CART tree on every row of `train`.
pub fn fit_tree(train: &Dataset, params: &TreeParams) -> Result<DecisionTreeModel, ModelError> {
    params.validate()?;
    if train.n_rows() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    let view = View::of(train);
    Ok(grow(&view, (0..train.n_rows()).collect(), params, FeatureChoice::All))
}

impl DecisionTreeModel {
    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                TreeNode::Leaf { class, .. } => return *class,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => id = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict(&self, x: &[f64], n_cols: usize) -> Result<Vec<usize>, ModelError> {
        check_width(self.n_cols, x, n_cols)?;
        Ok(super::map_rows(x, n_cols, |r| self.predict_row(r)))
    }

    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, d)) = stack.pop() {
            max = max.max(d);
            if let TreeNode::Split { left, right, .. } = self.nodes[id] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        max
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    /// Total impurity decrease per feature, each split weighted by its share
    /// of the tree's training rows. Not normalized.
    pub fn raw_importances(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_cols];
        let root_n = match &self.nodes[0] {
            TreeNode::Split { n_samples, .. } => *n_samples as f64,
            TreeNode::Leaf { .. } => return imp,
        };
        for node in &self.nodes {
            if let TreeNode::Split {
                feature,
                n_samples,
                impurity_decrease,
                ..
            } = node
            {
                imp[*feature] += *n_samples as f64 / root_n * impurity_decrease;
            }
        }
        imp
    }
}

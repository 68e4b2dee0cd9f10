#![allow(dead_code)]

pub mod invariants;

use rand::Rng as _;
use ztids::kdd::{self, RawDataset};
use ztids::rng;
use ztids::Dataset;

pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|&c| (c as f64 / n as f64).powi(2)).sum::<f64>()
}

fn hist(ds: &Dataset, rows: &[usize]) -> Vec<usize> {
    let mut h = vec![0; ds.n_classes()];
    for &r in rows {
        h[ds.y()[r]] += 1;
    }
    h
}

/// Every (feature, midpoint) pair scored directly from the two child
/// histograms. Returns (feature, threshold, decrease).
pub fn brute_best_split(ds: &Dataset, rows: &[usize], features: &[usize]) -> Option<(usize, f64, f64)> {
    let n = rows.len() as f64;
    let parent = gini(&hist(ds, rows));
    let mut best: Option<(usize, f64, f64)> = None;
    for &f in features {
        let mut values: Vec<f64> = rows.iter().map(|&r| ds.row(r)[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| ds.row(i)[f] <= t);
            let d = parent
                - (l.len() as f64 / n) * gini(&hist(ds, &l))
                - (r.len() as f64 / n) * gini(&hist(ds, &r));
            if d > 1e-12 && best.is_none_or(|b| d > b.2 + 1e-12) {
                best = Some((f, t, d));
            }
        }
    }
    best
}

/// Sorts every other row by (distance, index) and keeps the first `k`.
pub fn brute_knn(points: &[f64], n_cols: usize, query: usize, k: usize) -> Vec<usize> {
    let q = &points[query * n_cols..(query + 1) * n_cols];
    let mut all: Vec<(f64, usize)> = points
        .chunks_exact(n_cols)
        .enumerate()
        .filter(|&(j, _)| j != query)
        .map(|(j, p)| (q.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum(), j))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|(_, j)| j).collect()
}

/// True when `s` lies on the segment from some class row `x` towards one of
/// its `k` nearest class rows.
pub fn on_some_segment(s: &[f64], class_points: &[f64], n_cols: usize, k: usize) -> bool {
    let n = class_points.len() / n_cols;
    let row = |i: usize| &class_points[i * n_cols..(i + 1) * n_cols];
    (0..n).any(|i| {
        let x = row(i);
        brute_knn(class_points, n_cols, i, k).into_iter().any(|j| {
            let nn = row(j);
            let (dim, span) = (0..n_cols)
                .map(|d| (d, nn[d] - x[d]))
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .unwrap();
            let r = if span == 0.0 { 0.0 } else { (s[dim] - x[dim]) / span };
            (-1e-12..1.0 + 1e-12).contains(&r)
                && (0..n_cols).all(|d| (x[d] + r * (nn[d] - x[d]) - s[d]).abs() <= 1e-9 * (1.0 + x[d].abs() + nn[d].abs()))
        })
    })
}

/// Gaussian-ish blobs: class `c` is centred at `c * spread` on every axis.
pub fn blobs(n: usize, n_classes: usize, n_cols: usize, spread: f64, seed: u64) -> Dataset {
    let mut rng = rng::stream(seed, 999);
    let mut x = Vec::with_capacity(n * n_cols);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % n_classes;
        for _ in 0..n_cols {
            let noise: f64 = (0..4).map(|_| rng.random_range(-1.0..1.0)).sum::<f64>() * 0.5;
            x.push(c as f64 * spread + noise);
        }
        y.push(c);
    }
    Dataset::from_matrix(n_cols, x, y, n_classes).unwrap()
}

/// `ds` with each label replaced by a uniformly random one with probability `p`.
pub fn with_label_noise(ds: &Dataset, p: f64, seed: u64) -> Dataset {
    let mut rng = rng::stream(seed, 998);
    let y: Vec<usize> = ds
        .y()
        .iter()
        .map(|&c| if rng.random_bool(p) { rng.random_range(0..ds.n_classes()) } else { c })
        .collect();
    Dataset::from_matrix(ds.n_cols(), ds.x().to_vec(), y, ds.n_classes()).unwrap()
}

pub fn random_matrix(rows: usize, cols: usize, levels: u32, n_classes: usize, seed: u64) -> Dataset {
    let mut rng = rng::stream(seed, 997);
    let x = (0..rows * cols).map(|_| rng.random_range(0..levels) as f64).collect();
    let y = (0..rows).map(|_| rng.random_range(0..n_classes)).collect();
    Dataset::from_matrix(cols, x, y, n_classes).unwrap()
}

pub fn synth_raw(n: usize, seed: u64) -> RawDataset {
    let text = ztids::synth::generate_text(n, seed);
    kdd::parse_kdd(text.as_bytes(), "synth", true).unwrap()
}

/// Minimal CART written straight from the definition: exhaustive split
/// search at every node, recursion instead of an explicit stack.
pub enum RefTree {
    Leaf(usize),
    Split { feature: usize, threshold: f64, left: Box<RefTree>, right: Box<RefTree> },
}

impl RefTree {
    pub fn fit(ds: &Dataset, rows: &[usize], depth_left: usize) -> Self {
        let h = hist(ds, rows);
        let majority = h.iter().enumerate().fold(0, |b, (i, &c)| if c > h[b] { i } else { b });
        let pure = h.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth_left == 0 || rows.len() < 2 {
            return Self::Leaf(majority);
        }
        let features: Vec<usize> = (0..ds.n_cols()).collect();
        match brute_best_split(ds, rows, &features) {
            None => Self::Leaf(majority),
            Some((feature, threshold, _)) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| ds.row(i)[feature] <= threshold);
                Self::Split {
                    feature,
                    threshold,
                    left: Box::new(Self::fit(ds, &l, depth_left - 1)),
                    right: Box::new(Self::fit(ds, &r, depth_left - 1)),
                }
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        match self {
            Self::Leaf(c) => *c,
            Self::Split { feature, threshold, left, right } => {
                if row[*feature] <= *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }
}

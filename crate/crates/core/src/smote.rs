//! Synthetic minority oversampling.
//!
//! A synthetic row is `x + r * (nn - x)` where `x` is a row of the class being
//! grown, `nn` one of its `k` nearest same-class rows (Euclidean, exact
//! search) and `r` is uniform in `[0, 1)`. Each class draws from its own
//! random stream keyed by `(seed, class id)`.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::rng;

#[derive(Debug, Error, PartialEq)]
pub enum SmoteError {
    #[error("class {class:?} has {size} row(s); at least 2 are needed to synthesize")]
    TooFewSamples { class: String, size: usize },
    #[error("target for class {class:?} is {target}, below its current count {current}")]
    TargetBelowCurrent {
        class: String,
        target: usize,
        current: usize,
    },
    #[error("target names unknown class {0:?}")]
    UnknownClass(String),
    #[error("k_neighbors must be at least 1")]
    InvalidK,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SmoteTarget {
    /// Grow every class to the size of the largest one.
    #[default]
    BalanceToMajority,
    /// Explicit final sizes by class name; unlisted classes are untouched.
    PerClassCounts(BTreeMap<String, usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub target: SmoteTarget,
    pub seed: u64,
    /// Classes larger than this search neighbors in a seeded random subset of
    /// this many rows instead of the whole class. `None` always searches the
    /// whole class.
    pub max_neighbor_pool: Option<usize>,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            target: SmoteTarget::BalanceToMajority,
            seed: 42,
            max_neighbor_pool: Some(20_000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassResample {
    pub class: String,
    pub before: usize,
    pub after: usize,
    pub synthetic: usize,
    pub k_used: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleReport {
    pub classes: Vec<ClassResample>,
}

impl ResampleReport {
    pub fn total_synthetic(&self) -> usize {
        self.classes.iter().map(|c| c.synthetic).sum()
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k` nearest rows to `query` among `candidates`, skipping `exclude`.
/// Ties go to the lower row index.
fn knn_among(
    points: &[f64],
    n_cols: usize,
    candidates: impl Iterator<Item = usize>,
    query: &[f64],
    exclude: usize,
    k: usize,
) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = candidates
        .filter(|&j| j != exclude)
        .map(|j| (sq_dist(query, &points[j * n_cols..(j + 1) * n_cols]), j))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let k = k.min(scored.len());
    if k == 0 {
        return Vec::new();
    }
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_unstable_by(cmp);
    let mut nearest = Vec::with_capacity(k);
    nearest.extend(scored.iter().map(|&(_, j)| j));
    nearest
}

/// The `k` nearest rows of `points` (row-major, `n_cols` wide) to row
/// `query`, excluding the query itself, nearest first.
pub fn knn_minority(points: &[f64], n_cols: usize, query: usize, k: usize) -> Vec<usize> {
    let n = points.len() / n_cols;
    let q = &points[query * n_cols..(query + 1) * n_cols];
    knn_among(points, n_cols, 0..n, q, query, k)
}

/// Generates `count` synthetic rows from one class's rows.
fn synthesize_class(
    points: &[f64],
    n_cols: usize,
    count: usize,
    k: usize,
    pool_cap: Option<usize>,
    rng: &mut rng::Rng,
) -> Vec<f64> {
    let n = points.len() / n_cols;
    let pool: Option<Vec<usize>> = match pool_cap {
        Some(cap) if n > cap => {
            let mut p = index::sample(rng, n, cap).into_vec();
            p.sort_unstable();
            Some(p)
        }
        _ => None,
    };
    let mut neighbors: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut out = Vec::with_capacity(count * n_cols);
    for _ in 0..count {
        let base = rng.random_range(0..n);
        let x = &points[base * n_cols..(base + 1) * n_cols];
        let nn_list = neighbors[base].get_or_insert_with(|| match &pool {
            Some(p) => knn_among(points, n_cols, p.iter().copied(), x, base, k),
            None => knn_among(points, n_cols, 0..n, x, base, k),
        });
        let nn = nn_list[rng.random_range(0..nn_list.len())];
        let r: f64 = rng.random();
        let xn = &points[nn * n_cols..(nn + 1) * n_cols];
        out.extend(x.iter().zip(xn).map(|(a, b)| a + r * (b - a)));
    }
    out
}

struct ClassPlan {
    class: usize,
    before: usize,
    target: usize,
    k: usize,
}

/// Oversamples the training partition. The output holds every input row
/// untouched, in order, followed by the synthetic rows grouped by class.
pub fn smote_resample(
    train: &Dataset,
    cfg: &SmoteConfig,
) -> Result<(Dataset, ResampleReport), SmoteError> {
    if cfg.k_neighbors == 0 {
        return Err(SmoteError::InvalidK);
    }
    let counts = train.class_counts();
    let names = train.class_names();
    let targets: Vec<usize> = match &cfg.target {
        SmoteTarget::BalanceToMajority => {
            let max = counts.iter().copied().max().unwrap_or(0);
            counts.iter().map(|&c| if c == 0 { 0 } else { max }).collect()
        }
        SmoteTarget::PerClassCounts(map) => {
            if let Some(unknown) = map.keys().find(|k| !names.contains(k)) {
                return Err(SmoteError::UnknownClass(unknown.clone()));
            }
            names
                .iter()
                .zip(&counts)
                .map(|(name, &c)| map.get(name).copied().unwrap_or(c))
                .collect()
        }
    };

    let mut plans = Vec::new();
    for (class, (&before, &target)) in counts.iter().zip(&targets).enumerate() {
        if target < before {
            return Err(SmoteError::TargetBelowCurrent {
                class: names[class].clone(),
                target,
                current: before,
            });
        }
        if before == 0 && matches!(cfg.target, SmoteTarget::BalanceToMajority) {
            log::warn!("class {} is absent from the training rows", names[class]);
        }
        let mut k = cfg.k_neighbors;
        if target > before {
            if before < 2 {
                return Err(SmoteError::TooFewSamples {
                    class: names[class].clone(),
                    size: before,
                });
            }
            if k >= before {
                log::warn!(
                    "k_neighbors={k} is not below the {before} rows of class {}; using k={}",
                    names[class],
                    before - 1
                );
                k = before - 1;
            }
        }
        plans.push(ClassPlan {
            class,
            before,
            target,
            k,
        });
    }

    let n_cols = train.n_cols();
    let make = |plan: &ClassPlan| -> Vec<f64> {
        let needed = plan.target - plan.before;
        if needed == 0 {
            return Vec::new();
        }
        let mut points = Vec::with_capacity(plan.before * n_cols);
        for (row, &c) in train.rows().zip(train.y()) {
            if c == plan.class {
                points.extend_from_slice(row);
            }
        }
        let mut rng = rng::stream(cfg.seed, plan.class as u64);
        synthesize_class(&points, n_cols, needed, plan.k, cfg.max_neighbor_pool, &mut rng)
    };
    #[cfg(feature = "parallel")]
    let synthetic: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        plans.par_iter().map(make).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let synthetic: Vec<Vec<f64>> = plans.iter().map(make).collect();

    let mut out = train.clone();
    let mut report = ResampleReport::default();
    for (plan, rows) in plans.iter().zip(synthetic) {
        let added = if n_cols == 0 { 0 } else { rows.len() / n_cols };
        for row in rows.chunks_exact(n_cols.max(1)) {
            out.push_synthetic(row, plan.class);
        }
        report.classes.push(ClassResample {
            class: names[plan.class].clone(),
            before: plan.before,
            after: plan.before + added,
            synthetic: added,
            k_used: plan.k,
        });
    }
    Ok((out, report))
}

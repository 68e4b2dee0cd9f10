//! Bagged random forests of CART trees with Gini feature importances.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::tree::{grow, DecisionTreeModel, FeatureChoice, TreeParams, View};
use super::{check_width, ModelError};
use crate::dataset::Dataset;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per split; `None` means `floor(sqrt(n_cols))`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
    pub tree: TreeParams,
    /// Train trees on the rayon pool. Output is identical either way.
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            features_per_split: None,
            bootstrap: true,
            seed: 42,
            tree: TreeParams::default(),
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub n_cols: usize,
    pub n_classes: usize,
    pub features_per_split: usize,
    pub trees: Vec<DecisionTreeModel>,
}

pub fn fit_forest(train: &Dataset, params: &ForestParams) -> Result<ForestModel, ModelError> {
    params.tree.validate()?;
    if params.n_trees == 0 {
        return Err(ModelError::InvalidParams("n_trees must be >= 1".into()));
    }
    if train.n_rows() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    let n_cols = train.n_cols();
    let m = params
        .features_per_split
        .unwrap_or_else(|| ((n_cols as f64).sqrt().floor() as usize).max(1));
    if m == 0 || m > n_cols {
        return Err(ModelError::InvalidParams(format!(
            "features_per_split {m} must lie in [1, {n_cols}]"
        )));
    }
    let view = View::of(train);
    let n = train.n_rows();

    let grow_one = |t: usize| {
        let mut rng = rng::stream(params.seed, t as u64);
        let rows: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let choice = if m == n_cols {
            FeatureChoice::All
        } else {
            FeatureChoice::Random {
                per_split: m,
                rng: &mut rng,
            }
        };
        grow(&view, rows, &params.tree, choice)
    };

    #[cfg(feature = "parallel")]
    let trees: Vec<DecisionTreeModel> = if params.parallel {
        use rayon::prelude::*;
        (0..params.n_trees).into_par_iter().map(grow_one).collect()
    } else {
        (0..params.n_trees).map(grow_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let trees: Vec<DecisionTreeModel> = (0..params.n_trees).map(grow_one).collect();

    Ok(ForestModel {
        params: *params,
        n_cols,
        n_classes: train.n_classes(),
        features_per_split: m,
        trees,
    })
}

impl ForestModel {
    /// Majority vote; ties go to the lower class id.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes.max(1)];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1;
        }
        let mut best = 0;
        for (c, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = c;
            }
        }
        best
    }

    pub fn predict(&self, x: &[f64], n_cols: usize) -> Result<Vec<usize>, ModelError> {
        check_width(self.n_cols, x, n_cols)?;
        Ok(super::map_rows(x, n_cols, |r| self.predict_row(r)))
    }

    /// Mean per-tree impurity decrease by feature, normalized to sum to one.
    /// A forest of single-leaf trees yields uniform importances.
    pub fn feature_importances(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.n_cols];
        for t in &self.trees {
            for (acc, v) in total.iter_mut().zip(t.raw_importances()) {
                *acc += v;
            }
        }
        let n = self.trees.len() as f64;
        total.iter_mut().for_each(|v| *v /= n);
        let sum: f64 = total.iter().sum();
        if sum > 0.0 {
            total.iter_mut().for_each(|v| *v /= sum);
        } else if self.n_cols > 0 {
            total.fill(1.0 / self.n_cols as f64);
        }
        total
    }
}

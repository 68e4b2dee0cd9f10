//! One-vs-rest linear SVM trained by stochastic subgradient descent on the
//! L2-regularized hinge loss (Pegasos step schedule).

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{check_width, ModelError};
use crate::dataset::Dataset;
use crate::preprocess::ColumnStats;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 5,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl BinaryMachine {
    #[inline]
    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmOvrModel {
    pub params: SvmParams,
    pub n_cols: usize,
    /// One machine per class, in class-id order.
    pub machines: Vec<BinaryMachine>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `max(0, 1 - y (w.x + b))` for `y` in {-1, +1}.
pub fn hinge_loss(weights: &[f64], bias: f64, x: &[f64], y: f64) -> f64 {
    (1.0 - y * (dot(weights, x) + bias)).max(0.0)
}

/// `lambda/2 |w|^2 + mean hinge loss` of machine `m` for "class vs rest".
pub fn objective(m: &BinaryMachine, ds: &Dataset, class: usize, lambda: f64) -> f64 {
    let reg = 0.5 * lambda * dot(&m.weights, &m.weights);
    let loss: f64 = ds
        .rows()
        .zip(ds.y())
        .map(|(x, &c)| hinge_loss(&m.weights, m.bias, x, if c == class { 1.0 } else { -1.0 }))
        .sum();
    reg + loss / ds.n_rows().max(1) as f64
}

/// Objective values recorded while training one machine.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub initial: f64,
    /// `(step, objective)` pairs.
    pub points: Vec<(usize, f64)>,
}

/// Trains the "class vs rest" machine. With `trace_every = Some(s)` the full
/// objective is evaluated every `s` steps.
pub fn train_binary(
    ds: &Dataset,
    class: usize,
    params: &SvmParams,
    trace_every: Option<usize>,
) -> (BinaryMachine, Trace) {
    let d = ds.n_cols();
    let n = ds.n_rows();
    let lambda = params.lambda;
    let mut m = BinaryMachine {
        weights: vec![0.0; d],
        bias: 0.0,
    };
    let mut trace = Trace::default();
    if trace_every.is_some() {
        trace.initial = objective(&m, ds, class, lambda);
    }
    let mut rng = rng::stream(params.seed, class as u64);
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0usize;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let x = ds.row(i);
            let y = if ds.y()[i] == class { 1.0 } else { -1.0 };
            let margin = y * m.score(x);
            let shrink = 1.0 - eta * lambda;
            if margin < 1.0 {
                for (w, xi) in m.weights.iter_mut().zip(x) {
                    *w = shrink * *w + eta * y * xi;
                }
                m.bias += eta * y;
            } else {
                m.weights.iter_mut().for_each(|w| *w *= shrink);
            }
            if let Some(every) = trace_every {
                if t % every == 0 {
                    trace.points.push((t, objective(&m, ds, class, lambda)));
                }
            }
        }
    }
    (m, trace)
}

/// Logs a warning when columns do not look standardized.
pub fn check_standardized(ds: &Dataset) -> bool {
    let cols = ds.n_cols();
    let mut ok = true;
    for (j, col) in ds.columns().iter().enumerate() {
        let Some(s) = ColumnStats::fit(ds.x().iter().skip(j).step_by(cols.max(1)).copied()) else {
            return true;
        };
        if s.constant {
            continue;
        }
        if s.mean.abs() > 0.5 || !(0.5..=2.0).contains(&s.std) {
            log::warn!(
                "column {} does not look standardized (mean {:.3}, std {:.3})",
                col.name,
                s.mean,
                s.std
            );
            ok = false;
        }
    }
    ok
}

pub fn fit_svm(train: &Dataset, params: &SvmParams) -> Result<SvmOvrModel, ModelError> {
    if !(params.lambda > 0.0) || params.epochs == 0 {
        return Err(ModelError::InvalidParams(
            "svm needs lambda > 0 and epochs >= 1".into(),
        ));
    }
    if train.n_rows() == 0 {
        return Err(ModelError::EmptyTrainingSet);
    }
    check_standardized(train);
    let fit_one = |c: usize| train_binary(train, c, params, None).0;
    #[cfg(feature = "parallel")]
    let machines = {
        use rayon::prelude::*;
        (0..train.n_classes()).into_par_iter().map(fit_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let machines = (0..train.n_classes()).map(fit_one).collect();
    Ok(SvmOvrModel {
        params: *params,
        n_cols: train.n_cols(),
        machines,
    })
}

/// Index of the largest score; ties go to the lower index.
pub fn argmax_scores(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

impl SvmOvrModel {
    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        self.machines.iter().map(|m| m.score(row)).collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax_scores(&self.scores(row))
    }

    pub fn predict(&self, x: &[f64], n_cols: usize) -> Result<Vec<usize>, ModelError> {
        check_width(self.n_cols, x, n_cols)?;
        Ok(super::map_rows(x, n_cols, |r| self.predict_row(r)))
    }
}

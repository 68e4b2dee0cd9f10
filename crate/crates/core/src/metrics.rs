//! Confusion matrices, per-class precision / recall / F1, accuracy and
//! support-weighted F1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("y_true has {truth} entries but y_pred has {pred}")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("class id {id} at position {pos} is out of range for {n_classes} classes")]
    ClassOutOfRange { pos: usize, id: usize, n_classes: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
}

/// `counts[i][j]` = rows of true class `i` predicted as `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }
}

pub fn confusion(
    y_true: &[usize],
    y_pred: &[usize],
    class_names: &[String],
) -> Result<ConfusionMatrix, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: y_true.len(),
            pred: y_pred.len(),
        });
    }
    let c = class_names.len();
    let mut counts = vec![vec![0u64; c]; c];
    for (pos, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        for id in [t, p] {
            if id >= c {
                return Err(MetricsError::ClassOutOfRange { pos, id, n_classes: c });
            }
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix {
        class_names: class_names.to_vec(),
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Nothing was predicted as this class; precision reported as 0.
    pub precision_undefined: bool,
    /// The class has no true rows; recall reported as 0.
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub weighted_f1: f64,
    pub macro_f1: f64,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsBundle, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::EmptyMatrix);
    }
    let c = cm.n_classes();
    let per_class: Vec<ClassMetrics> = (0..c)
        .map(|k| {
            let tp = cm.counts[k][k];
            let support: u64 = cm.counts[k].iter().sum();
            let predicted: u64 = (0..c).map(|i| cm.counts[i][k]).sum();
            let (precision, precision_undefined) = ratio(tp, predicted);
            let (recall, recall_undefined) = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                class: cm.class_names[k].clone(),
                precision,
                recall,
                f1,
                support,
                precision_undefined,
                recall_undefined,
            }
        })
        .collect();
    let n = total as f64;
    let weighted_f1 = per_class.iter().map(|m| m.support as f64 / n * m.f1).sum();
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / c.max(1) as f64;
    Ok(MetricsBundle {
        accuracy: cm.trace() as f64 / n,
        per_class,
        weighted_f1,
        macro_f1,
    })
}

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> f64 {
    if y_true.is_empty() {
        return 0.0;
    }
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    hits as f64 / y_true.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn names(n: usize) -> Vec<String> {
        ["A", "B", "C", "D"][..n].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_prediction() {
        let cm = confusion(&[0, 1, 2], &[0, 1, 2], &names(3)).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let m = compute_metrics(&cm).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.weighted_f1, 1.0);
    }

    #[test]
    fn all_wrong() {
        let cm = confusion(&[0, 0], &[1, 1], &names(2)).unwrap();
        assert_eq!(cm.counts, vec![vec![0, 2], vec![0, 0]]);
        let m = compute_metrics(&cm).unwrap();
        assert_eq!(m.accuracy, 0.0);
        assert!(m.per_class[0].precision_undefined);
        assert!(m.per_class[1].recall_undefined);
    }

    #[test]
    fn five_sample_example() {
        // A A B B C vs A B B B C
        let cm = confusion(&[0, 0, 1, 1, 2], &[0, 1, 1, 1, 2], &names(3)).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 1, 0], vec![0, 2, 0], vec![0, 0, 1]]);
        let m = compute_metrics(&cm).unwrap();
        assert_abs_diff_eq!(m.accuracy, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(m.per_class[0].f1, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.per_class[1].f1, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(m.per_class[2].f1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.weighted_f1, 0.786667, epsilon = 1e-6);
        assert_abs_diff_eq!(m.weighted_f1, (2.0 * 2.0 / 3.0 + 2.0 * 0.8 + 1.0) / 5.0, epsilon = 1e-12);
    }

    #[test]
    fn absent_class_has_zero_weight() {
        let cm = confusion(&[0, 1], &[0, 1], &names(3)).unwrap();
        let m = compute_metrics(&cm).unwrap();
        let c = &m.per_class[2];
        assert_eq!((c.f1, c.support), (0.0, 0));
        assert_eq!(m.weighted_f1, 1.0);
        assert_abs_diff_eq!(m.macro_f1, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(
            confusion(&[0], &[0, 1], &names(2)),
            Err(MetricsError::LengthMismatch { truth: 1, pred: 2 })
        );
        assert!(matches!(
            confusion(&[0, 3], &[0, 0], &names(2)),
            Err(MetricsError::ClassOutOfRange { pos: 1, id: 3, .. })
        ));
        let empty = confusion(&[], &[], &names(2)).unwrap();
        assert_eq!(compute_metrics(&empty), Err(MetricsError::EmptyMatrix));
    }
}

//! Supervised models: CART tree, random forest, one-vs-rest linear SVM.

pub mod forest;
pub mod svm;
pub mod tree;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;

pub use forest::{fit_forest, ForestModel, ForestParams};
pub use svm::{fit_svm, hinge_loss, SvmOvrModel, SvmParams};
pub use tree::{best_split, fit_tree, gini_impurity, DecisionTreeModel, Split, TreeNode, TreeParams};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("class histogram is empty")]
    EmptyHistogram,
    #[error("input has {found} columns, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("model document: {0}")]
    Document(String),
}

pub(crate) fn check_width(expected: usize, x: &[f64], n_cols: usize) -> Result<(), ModelError> {
    if n_cols != expected || (n_cols > 0 && x.len() % n_cols != 0) {
        return Err(ModelError::DimensionMismatch {
            expected,
            found: n_cols,
        });
    }
    Ok(())
}

pub(crate) fn map_rows<F>(x: &[f64], n_cols: usize, f: F) -> Vec<usize>
where
    F: Fn(&[f64]) -> usize + Sync + Send,
{
    if n_cols == 0 {
        return Vec::new();
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        x.par_chunks_exact(n_cols).map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    x.chunks_exact(n_cols).map(f).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    DecisionTree(DecisionTreeModel),
    RandomForest(ForestModel),
    SvmOvr(SvmOvrModel),
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::DecisionTree(_) => "decision_tree",
            Self::RandomForest(_) => "random_forest",
            Self::SvmOvr(_) => "svm_ovr",
        }
    }

    pub fn predict(&self, x: &[f64], n_cols: usize) -> Result<Vec<usize>, ModelError> {
        match self {
            Self::DecisionTree(m) => m.predict(x, n_cols),
            Self::RandomForest(m) => m.predict(x, n_cols),
            Self::SvmOvr(m) => m.predict(x, n_cols),
        }
    }

    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<usize>, ModelError> {
        self.predict(ds.x(), ds.n_cols())
    }
}

pub const MODEL_FORMAT: &str = "ztids-model/1";

/// Self-describing persisted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub name: String,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    /// Fingerprint of the preprocessor the model was trained behind.
    pub preprocessor_fingerprint: Option<String>,
    pub model: TrainedModel,
}

impl ModelDocument {
    pub fn new(name: &str, ds: &Dataset, fingerprint: Option<String>, model: TrainedModel) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            name: name.into(),
            class_names: ds.class_names().to_vec(),
            feature_names: ds.columns().iter().map(|c| c.name.clone()).collect(),
            preprocessor_fingerprint: fingerprint,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| ModelError::Document(e.to_string()))?;
        if doc.format != MODEL_FORMAT {
            return Err(ModelError::Document(format!("unsupported format {:?}", doc.format)));
        }
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ModelError::Document(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_round_trip() {
        let ds = Dataset::from_matrix(1, vec![0.0, 1.0, 2.0], vec![0, 1, 1], 2).unwrap();
        let tree = fit_tree(&ds, &TreeParams::default()).unwrap();
        let doc = ModelDocument::new("dt", &ds, Some("abc".into()), TrainedModel::DecisionTree(tree));
        let back = ModelDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.model.kind(), "decision_tree");
        assert!(doc.to_json().contains("\"kind\": \"decision_tree\""));
    }

    #[test]
    fn rejects_foreign_documents() {
        assert!(ModelDocument::from_json("{}").is_err());
        let ds = Dataset::from_matrix(1, vec![0.0], vec![0], 1).unwrap();
        let tree = fit_tree(&ds, &TreeParams::default()).unwrap();
        let mut doc = ModelDocument::new("dt", &ds, None, TrainedModel::DecisionTree(tree));
        doc.format = "other/9".into();
        assert!(ModelDocument::from_json(&doc.to_json()).is_err());
    }
}

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::classifiers::{ForestParams, SvmParams, TreeParams};
use crate::kdd::LabelMode;
use crate::preprocess::{ScalerScope, SplitSpec};
use crate::smote::SmoteConfig;

/// Environment variable naming the directory searched for relative dataset
/// paths that do not exist relative to the working directory.
pub const DATA_DIR_ENV: &str = "ZTIDS_DATA_DIR";

pub const DEFAULT_DATASET: &str = "kddcup.data_10_percent.gz";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    DecisionTree {
        #[serde(default)]
        params: TreeParams,
    },
    RandomForest {
        #[serde(default)]
        params: ForestParams,
    },
    Svm {
        #[serde(default)]
        params: SvmParams,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    /// Train on the SMOTE-resampled training partition.
    #[serde(default)]
    pub smote: bool,
    #[serde(flatten)]
    pub model: ModelKind,
}

impl ModelSpec {
    pub fn new(name: &str, model: ModelKind) -> Self {
        Self {
            name: name.into(),
            smote: false,
            model,
        }
    }

    pub fn with_smote(mut self) -> Self {
        self.smote = true;
        self
    }

    /// File-name-safe form of the model name.
    pub fn slug(&self) -> String {
        let s: String = self
            .name
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
            .collect();
        s.trim_matches('_').to_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset_path: PathBuf,
    pub label_mode: LabelMode,
    /// Abort on the first malformed line instead of skipping it.
    pub strict: bool,
    /// Remove exact duplicate records before splitting.
    pub dedup: bool,
    pub split: SplitSpec,
    pub scaler_scope: ScalerScope,
    pub smote: SmoteConfig,
    /// SVM machines train on a stratified, seeded subsample of at most this
    /// many rows.
    pub svm_train_cap: Option<usize>,
    pub models: Vec<ModelSpec>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset_path: PathBuf::from(DEFAULT_DATASET),
            label_mode: LabelMode::FiveCategory,
            strict: true,
            dedup: true,
            split: SplitSpec::default(),
            scaler_scope: ScalerScope::AllColumns,
            smote: SmoteConfig::default(),
            svm_train_cap: Some(100_000),
            models: Vec::new(),
            output_dir: PathBuf::from("runs/latest"),
        }
    }
}

impl ExperimentConfig {
    /// Decision tree, random forest, SVM and SMOTE random forest with
    /// default hyperparameters.
    pub fn standard_comparison() -> Self {
        Self {
            models: vec![
                ModelSpec::new("Decision Tree", ModelKind::DecisionTree { params: TreeParams::default() }),
                ModelSpec::new("Random Forest", ModelKind::RandomForest { params: ForestParams::default() }),
                ModelSpec::new("SVM", ModelKind::Svm { params: SvmParams::default() }),
                ModelSpec::new("SMOTE Random Forest", ModelKind::RandomForest { params: ForestParams::default() })
                    .with_smote(),
            ],
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.models.is_empty() {
            return Err(HarnessError::Config("at least one model is required".into()));
        }
        let mut seen = HashSet::new();
        for m in &self.models {
            if m.slug().is_empty() {
                return Err(HarnessError::Config(format!("model name {:?} is unusable", m.name)));
            }
            if !seen.insert(m.slug()) {
                return Err(HarnessError::Config(format!("duplicate model name {:?}", m.name)));
            }
        }
        if self.svm_train_cap == Some(0) {
            return Err(HarnessError::Config("svm_train_cap must be positive".into()));
        }
        Ok(())
    }

    /// The dataset path as given, or under `$ZTIDS_DATA_DIR` when the given
    /// relative path does not exist.
    pub fn resolved_dataset_path(&self) -> PathBuf {
        resolve_data_path(&self.dataset_path)
    }
}

pub fn resolve_data_path(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) => {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                candidate
            } else {
                path.to_path_buf()
            }
        }
        None => path.to_path_buf(),
    }
}

//! Label encoding of the token columns, standardization, and seeded
//! stratified train/test splitting.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::{Column, ColumnKind, Dataset, DatasetError};
use crate::kdd::{self, LabelMode, RawDataset, FEATURE_NAMES, N_FEATURES};
use crate::rng;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("column {column}: token {token:?} was not seen when fitting the encoder")]
    UnknownCategory { column: String, token: String },
    #[error("class {0:?} is not known to the preprocessor")]
    UnknownClass(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("preprocessor has no fitted scaler")]
    NotFitted,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("preprocessor document: {0}")]
    Json(#[from] serde_json::Error),
}

/// Dense label encoder for one token column. Codes follow ascending
/// lexicographic token order, so code `i` is `vocabulary[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryEncoder {
    pub column: usize,
    pub name: String,
    pub vocabulary: Vec<String>,
}

impl CategoryEncoder {
    pub fn fit<'a>(column: usize, tokens: impl IntoIterator<Item = &'a str>) -> Self {
        let vocab: BTreeSet<&str> = tokens.into_iter().collect();
        Self {
            column,
            name: FEATURE_NAMES.get(column).copied().unwrap_or("column").to_owned(),
            vocabulary: vocab.into_iter().map(str::to_owned).collect(),
        }
    }

    pub fn encode(&self, token: &str) -> Result<usize, PreprocessError> {
        self.vocabulary
            .binary_search_by(|v| v.as_str().cmp(token))
            .map_err(|_| PreprocessError::UnknownCategory {
                column: self.name.clone(),
                token: token.to_owned(),
            })
    }

    pub fn decode(&self, code: usize) -> Option<&str> {
        self.vocabulary.get(code).map(String::as_str)
    }
}

/// Fits one encoder per token column over all observed tokens.
pub fn fit_encoders(ds: &RawDataset) -> Vec<CategoryEncoder> {
    kdd::CATEGORICAL_COLUMNS
        .iter()
        .map(|&col| {
            CategoryEncoder::fit(col, ds.records.iter().map(|r| r.token(col).unwrap_or_default()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub constant: bool,
}

impl ColumnStats {
    pub fn fit(values: impl Iterator<Item = f64> + Clone) -> Option<Self> {
        let n = values.clone().count();
        if n == 0 {
            return None;
        }
        let mean = values.clone().sum::<f64>() / n as f64;
        let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        Some(Self {
            mean,
            std,
            constant: std == 0.0,
        })
    }

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        if self.constant {
            0.0
        } else {
            (v - self.mean) / self.std
        }
    }
}

/// Which columns the scaler standardizes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalerScope {
    /// Every column, including the integer codes of token columns.
    #[default]
    AllColumns,
    /// Numeric columns only; codes pass through unchanged.
    NumericOnly,
}

/// Per-column standardization statistics; `None` marks a pass-through column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub scope: ScalerScope,
    pub columns: Vec<Option<ColumnStats>>,
}

impl Scaler {
    pub fn apply_row(&self, row: &mut [f64]) {
        for (v, stats) in row.iter_mut().zip(&self.columns) {
            if let Some(s) = stats {
                *v = s.apply(*v);
            }
        }
    }

    pub fn apply(&self, ds: &mut Dataset) {
        let cols = ds.n_cols();
        if cols == 0 {
            return;
        }
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            ds.x_mut()
                .par_chunks_mut(cols * 1024)
                .for_each(|chunk| chunk.chunks_exact_mut(cols).for_each(|r| self.apply_row(r)));
        }
        #[cfg(not(feature = "parallel"))]
        ds.x_mut().chunks_exact_mut(cols).for_each(|r| self.apply_row(r));
    }
}

/// Fits the scaler on (training) rows only.
pub fn fit_scaler(train: &Dataset, scope: ScalerScope) -> Result<Scaler, PreprocessError> {
    if train.n_rows() == 0 {
        return Err(PreprocessError::InsufficientData(
            "cannot fit a scaler on an empty training partition".into(),
        ));
    }
    let cols = train.n_cols();
    let columns = train
        .columns()
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let scaled = scope == ScalerScope::AllColumns || col.kind == ColumnKind::Numeric;
            scaled.then(|| {
                let stats = ColumnStats::fit(train.x().iter().skip(j).step_by(cols).copied())
                    .expect("non-empty partition");
                if stats.constant {
                    log::debug!("column {} is constant on the training rows", col.name);
                }
                stats
            })
        })
        .collect();
    Ok(Scaler { scope, columns })
}

/// Everything needed to turn raw records into model input: label mode,
/// class order, encoders and scaler statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessorState {
    pub label_mode: LabelMode,
    pub class_names: Vec<String>,
    pub encoders: Vec<CategoryEncoder>,
    pub scaler: Option<Scaler>,
    pub fitted_on: String,
}

impl PreprocessorState {
    /// Fits encoders and the class list. `ds` must already hold mapped labels.
    pub fn fit_encoders(ds: &RawDataset, label_mode: LabelMode) -> Self {
        let class_names = kdd::class_inventory(ds).into_keys().collect();
        Self {
            label_mode,
            class_names,
            encoders: fit_encoders(ds),
            scaler: None,
            fitted_on: format!("{} ({} records)", ds.provenance.source, ds.len()),
        }
    }

    pub fn with_scaler(mut self, scaler: Scaler) -> Self {
        self.scaler = Some(scaler);
        self
    }

    pub fn is_complete(&self) -> bool {
        self.scaler.is_some()
    }

    /// Short hex digest identifying this exact state.
    pub fn fingerprint(&self) -> String {
        let doc = serde_json::to_vec(self).expect("state serializes");
        hex::encode(&Sha256::digest(&doc)[..8])
    }

    pub fn save(&self, path: &Path) -> Result<(), PreprocessError> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|source| PreprocessError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, PreprocessError> {
        let text = fs::read_to_string(path).map_err(|source| PreprocessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn kdd_columns() -> Vec<Column> {
    (0..N_FEATURES)
        .map(|i| Column {
            name: FEATURE_NAMES[i].to_owned(),
            kind: if kdd::is_categorical(i) {
                ColumnKind::CategoricalEncoded
            } else {
                ColumnKind::Numeric
            },
        })
        .collect()
}

/// Replaces tokens by codes and labels by class ids; no scaling.
pub fn encode(ds: &RawDataset, st: &PreprocessorState) -> Result<Dataset, PreprocessError> {
    let mut x = Vec::with_capacity(ds.len() * N_FEATURES);
    let mut y = Vec::with_capacity(ds.len());
    for rec in &ds.records {
        let mut enc = st.encoders.iter();
        for col in 0..N_FEATURES {
            match rec.value(col) {
                Some(v) => x.push(v),
                None => {
                    let encoder = enc.next().expect("one encoder per token column");
                    debug_assert_eq!(encoder.column, col);
                    x.push(encoder.encode(rec.token(col).unwrap_or_default())? as f64);
                }
            }
        }
        let class = st
            .class_names
            .binary_search_by(|c| c.as_str().cmp(rec.label()))
            .map_err(|_| PreprocessError::UnknownClass(rec.label().to_owned()))?;
        y.push(class);
    }
    Ok(Dataset::new(kdd_columns(), x, y, st.class_names.clone())?)
}

/// Encodes and standardizes with a complete state.
pub fn transform(ds: &RawDataset, st: &PreprocessorState) -> Result<Dataset, PreprocessError> {
    let scaler = st.scaler.as_ref().ok_or(PreprocessError::NotFitted)?;
    let mut out = encode(ds, st)?;
    scaler.apply(&mut out);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 42,
            stratified: true,
        }
    }
}

/// Size of the test share of a group of `n` rows: `round(n * f)` clamped to
/// `[1, n - 1]`.
pub fn test_share(n: usize, fraction: f64) -> usize {
    let raw = (n as f64 * fraction).round() as usize;
    raw.clamp(1, n.saturating_sub(1).max(1))
}

/// Returns ascending (train, test) row indices.
pub fn split_indices(
    y: &[usize],
    n_classes: usize,
    spec: &SplitSpec,
) -> Result<(Vec<usize>, Vec<usize>), PreprocessError> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(PreprocessError::InvalidSplit(format!(
            "test_fraction {} must lie strictly between 0 and 1",
            spec.test_fraction
        )));
    }
    let mut rng = rng::stream(spec.seed, 0);
    let groups: Vec<Vec<usize>> = if spec.stratified {
        let mut g = vec![Vec::new(); n_classes];
        for (i, &c) in y.iter().enumerate() {
            g[c].push(i);
        }
        g
    } else {
        vec![(0..y.len()).collect()]
    };

    let mut train = Vec::with_capacity(y.len());
    let mut test = Vec::new();
    for (gi, mut rows) in groups.into_iter().enumerate() {
        match rows.len() {
            0 => continue,
            1 if spec.stratified => {
                log::warn!("class {gi} has a single row; keeping it in the training partition");
                train.extend(rows);
                continue;
            }
            1 => {
                return Err(PreprocessError::InsufficientData(
                    "need at least two rows to split".into(),
                ))
            }
            n => {
                rows.shuffle(&mut rng);
                let k = test_share(n, spec.test_fraction);
                test.extend_from_slice(&rows[..k]);
                train.extend_from_slice(&rows[k..]);
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(
    ds: &Dataset,
    spec: &SplitSpec,
) -> Result<(Dataset, Dataset), PreprocessError> {
    let (train, test) = split_indices(ds.y(), ds.n_classes(), spec)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

//! Experiment orchestration: ingest, encode, split, scale, optional SMOTE,
//! train every configured model, evaluate, report.

mod config;
mod report;

use std::collections::HashSet;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classifiers::{
    fit_forest, fit_svm, fit_tree, ModelDocument, ModelError, TrainedModel,
};
use crate::dataset::{Dataset, RowOrigin};
use crate::kdd::{self, IngestError, LabelMapping, LabelMode, RawDataset};
use crate::metrics::{self, MetricsError};
use crate::preprocess::{self, PreprocessError, PreprocessorState, SplitSpec};
use crate::smote::{self, ResampleReport, SmoteError};

pub use config::{
    resolve_data_path, ExperimentConfig, ModelKind, ModelSpec, DATA_DIR_ENV, DEFAULT_DATASET,
};
pub use report::{
    emit_report, EvaluationReport, ModelRow, ReportFormat, RunProvenance, StageTiming, CSV_FILE,
    JSON_FILE,
};

pub const PREPROCESSOR_FILE: &str = "preprocessor.json";
pub const MODELS_DIR: &str = "models";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("ingest stage: {0}")]
    Ingest(#[from] IngestError),
    #[error("preprocess stage: {0}")]
    Preprocess(#[from] PreprocessError),
    #[error("smote stage: {0}")]
    Smote(#[from] SmoteError),
    #[error("train stage ({model}): {source}")]
    Train { model: String, source: ModelError },
    #[error("evaluate stage ({model}): {reason}")]
    Evaluate { model: String, reason: String },
    #[error("pipeline invariant violated: {0}")]
    Invariant(String),
    #[error("report: {0}")]
    Report(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl HarnessError {
    /// 1 = usage / configuration, 2 = bad input data, 3 = internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Train {
                source: ModelError::InvalidParams(_),
                ..
            } => 1,
            Self::Ingest(_) | Self::Preprocess(_) | Self::Smote(_) | Self::Report(_) => 2,
            Self::Train { .. } => 2,
            Self::Evaluate { .. } | Self::Invariant(_) | Self::Io { .. } => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Parses, optionally deduplicates and label-maps a KDD file. Also returns
/// the SHA-256 of the file bytes.
pub fn load_raw(
    path: &Path,
    strict: bool,
    dedup: bool,
    mode: LabelMode,
) -> Result<(RawDataset, String), HarnessError> {
    let bytes = fs::read(path).map_err(|source| IngestError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let mut raw = kdd::parse_kdd(Cursor::new(bytes), &path.display().to_string(), strict)?;
    if dedup {
        raw = kdd::dedup(raw);
    }
    let raw = kdd::map_labels(raw, &LabelMapping::new(mode))?;
    Ok((raw, digest))
}

/// Stratified seeded subsample of at most `cap` rows.
pub fn stratified_subsample(ds: &Dataset, cap: usize, seed: u64) -> Result<Dataset, HarnessError> {
    if ds.n_rows() <= cap {
        return Ok(ds.clone());
    }
    let spec = SplitSpec {
        test_fraction: cap as f64 / ds.n_rows() as f64,
        seed,
        stratified: true,
    };
    let (_, keep) = preprocess::split_indices(ds.y(), ds.n_classes(), &spec)?;
    Ok(ds.subset(&keep))
}

/// Fits one model on `train` as described by `spec.model`.
pub fn fit_model(spec: &ModelSpec, train: &Dataset) -> Result<TrainedModel, HarnessError> {
    let wrap = |source| HarnessError::Train {
        model: spec.name.clone(),
        source,
    };
    Ok(match &spec.model {
        ModelKind::DecisionTree { params } => TrainedModel::DecisionTree(fit_tree(train, params).map_err(wrap)?),
        ModelKind::RandomForest { params } => TrainedModel::RandomForest(fit_forest(train, params).map_err(wrap)?),
        ModelKind::Svm { params } => TrainedModel::SvmOvr(fit_svm(train, params).map_err(wrap)?),
    })
}

fn check_no_test_rows(train: &Dataset, test_sources: &HashSet<u32>, what: &str) -> Result<(), HarnessError> {
    for origin in train.origins() {
        if let RowOrigin::Source(id) = origin {
            if test_sources.contains(id) {
                return Err(HarnessError::Invariant(format!(
                    "{what} contains test row {id}"
                )));
            }
        }
    }
    Ok(())
}

/// Everything a run produces, before anything is written.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: EvaluationReport,
    pub preprocessor: PreprocessorState,
    pub models: Vec<(String, ModelDocument)>,
}

fn now_unix() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

struct Stages(Vec<StageTiming>, Instant);

impl Stages {
    fn new() -> Self {
        Self(Vec::new(), Instant::now())
    }

    fn mark(&mut self, stage: &str) {
        let secs = self.1.elapsed().as_secs_f64();
        log::info!("stage {stage} done in {secs:.2}s");
        self.0.push(StageTiming {
            stage: stage.into(),
            seconds: secs,
        });
        self.1 = Instant::now();
    }
}

/// Runs the whole pipeline in memory.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunArtifacts, HarnessError> {
    cfg.validate()?;
    let started = now_unix();
    let mut stages = Stages::new();
    let path = cfg.resolved_dataset_path();

    let (raw, digest) = load_raw(&path, cfg.strict, cfg.dedup, cfg.label_mode)?;
    let class_counts: Vec<(String, usize)> = kdd::class_inventory(&raw).into_iter().collect();
    let ingest = raw.provenance.clone();
    stages.mark("ingest");

    let state = PreprocessorState::fit_encoders(&raw, cfg.label_mode);
    let encoded = preprocess::encode(&raw, &state)?;
    drop(raw);
    let (train_idx, test_idx) = preprocess::split_indices(encoded.y(), encoded.n_classes(), &cfg.split)?;
    let mut train = encoded.subset(&train_idx);
    let mut test = encoded.subset(&test_idx);
    drop(encoded);
    let scaler = preprocess::fit_scaler(&train, cfg.scaler_scope)?;
    scaler.apply(&mut train);
    scaler.apply(&mut test);
    let state = state.with_scaler(scaler);
    let fingerprint = state.fingerprint();
    let test_sources: HashSet<u32> = test
        .origins()
        .iter()
        .filter_map(|o| match o {
            RowOrigin::Source(i) => Some(*i),
            RowOrigin::Synthetic => None,
        })
        .collect();
    check_no_test_rows(&train, &test_sources, "training partition")?;
    stages.mark("preprocess");

    let mut resampled: Option<(Dataset, ResampleReport)> = None;
    if cfg.models.iter().any(|m| m.smote) {
        let out = smote::smote_resample(&train, &cfg.smote)?;
        check_no_test_rows(&out.0, &test_sources, "SMOTE output")?;
        resampled = Some(out);
        stages.mark("smote");
    }

    let mut rows = Vec::with_capacity(cfg.models.len());
    let mut models = Vec::with_capacity(cfg.models.len());
    for spec in &cfg.models {
        let base = match (&resampled, spec.smote) {
            (Some((ds, _)), true) => ds,
            _ => &train,
        };
        let (fit_on, cap) = match (&spec.model, cfg.svm_train_cap) {
            (ModelKind::Svm { .. }, Some(cap)) if base.n_rows() > cap => {
                (std::borrow::Cow::Owned(stratified_subsample(base, cap, cfg.split.seed)?), Some(cap))
            }
            _ => (std::borrow::Cow::Borrowed(base), None),
        };
        check_no_test_rows(&fit_on, &test_sources, &spec.name)?;
        let model = fit_model(spec, &fit_on)?;
        stages.mark(&format!("train:{}", spec.name));

        let eval_err = |reason: String| HarnessError::Evaluate {
            model: spec.name.clone(),
            reason,
        };
        let train_pred = model.predict_dataset(&train).map_err(|e| eval_err(e.to_string()))?;
        let test_pred = model.predict_dataset(&test).map_err(|e| eval_err(e.to_string()))?;
        let cm = metrics::confusion(test.y(), &test_pred, test.class_names())
            .map_err(|e: MetricsError| eval_err(e.to_string()))?;
        let bundle = metrics::compute_metrics(&cm).map_err(|e| eval_err(e.to_string()))?;
        let importances = match &model {
            TrainedModel::RandomForest(f) => Some(
                test.columns()
                    .iter()
                    .map(|c| c.name.clone())
                    .zip(f.feature_importances())
                    .collect(),
            ),
            _ => None,
        };
        let model_file = format!("{MODELS_DIR}/{}.json", spec.slug());
        rows.push(ModelRow {
            name: spec.name.clone(),
            kind: model.kind().into(),
            smote: spec.smote,
            train_score: metrics::accuracy(train.y(), &train_pred),
            test_score: bundle.accuracy,
            f1_score: bundle.weighted_f1,
            rows_trained_on: fit_on.n_rows(),
            subsample_cap: cap,
            test_metrics: bundle,
            test_confusion: cm,
            feature_importances: importances,
            model_file: model_file.clone(),
        });
        models.push((
            model_file,
            ModelDocument::new(&spec.name, &train, Some(fingerprint.clone()), model),
        ));
        stages.mark(&format!("evaluate:{}", spec.name));
    }

    let provenance = RunProvenance {
        dataset_path: path.display().to_string(),
        dataset_sha256: digest,
        ingest,
        class_counts,
        train_rows: train.n_rows(),
        test_rows: test.n_rows(),
        train_class_counts: train.class_counts(),
        test_class_counts: test.class_counts(),
        preprocessor_fingerprint: fingerprint,
        started_unix: started,
        finished_unix: now_unix(),
        stages: stages.0,
    };
    let report = EvaluationReport {
        rows,
        resample: resampled.map(|(_, r)| r),
        config: cfg.clone(),
        provenance,
    };
    Ok(RunArtifacts {
        report,
        preprocessor: state,
        models,
    })
}

impl RunArtifacts {
    /// Writes report CSV/JSON, the preprocessor and every model into `dir`.
    pub fn persist(&self, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        let models_dir = dir.join(MODELS_DIR);
        fs::create_dir_all(&models_dir).map_err(io_err(&models_dir))?;
        let (mut written, _) =
            emit_report(&self.report, dir, &[ReportFormat::Csv, ReportFormat::Json])?;
        let pre = dir.join(PREPROCESSOR_FILE);
        self.preprocessor.save(&pre)?;
        written.push(pre);
        for (file, doc) in &self.models {
            let path = dir.join(file);
            doc.save(&path).map_err(io_err(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs the pipeline and persists its outputs under `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EvaluationReport, HarnessError> {
    let artifacts = run_pipeline(cfg)?;
    artifacts.persist(&cfg.output_dir)?;
    Ok(artifacts.report)
}

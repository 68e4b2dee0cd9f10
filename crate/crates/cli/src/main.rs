use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ztids::classifiers::{ModelDocument, ModelError};
use ztids::harness::{
    self, resolve_data_path, EvaluationReport, ExperimentConfig, HarnessError, ModelKind,
    ModelSpec,
};
use ztids::kdd::{self, LabelMode};
use ztids::metrics;
use ztids::preprocess::{self, PreprocessError, PreprocessorState, ScalerScope};
use ztids::smote::{self, SmoteConfig};

const USAGE_ERROR: u8 = 1;
const DATA_ERROR: u8 = 2;
const INTERNAL_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "ztids", version, about = "KDD Cup 1999 intrusion-detection pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Raw,
    FiveCategory,
    Binary,
}

impl From<Mode> for LabelMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Raw => LabelMode::Raw,
            Mode::FiveCategory => LabelMode::FiveCategory,
            Mode::Binary => LabelMode::Binary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    AllColumns,
    NumericOnly,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    DecisionTree,
    RandomForest,
    Svm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(clap::Args)]
struct Input {
    /// KDD CSV file, optionally gzip-compressed.
    data: PathBuf,
    #[arg(long, value_enum, default_value = "five-category")]
    label_mode: Mode,
    /// Skip malformed lines instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Keep exact duplicate records.
    #[arg(long)]
    no_dedup: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, deduplicate and summarize a dataset.
    Ingest {
        #[command(flatten)]
        input: Input,
    },
    /// Fit encoders and scaler on a dataset and save them.
    Preprocess {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "all-columns")]
        scaler_scope: Scope,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model on a dataset through a saved preprocessor.
    Train {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        preprocessor: PathBuf,
        #[arg(long, value_enum)]
        model: Kind,
        /// Hyperparameter overrides as a JSON object.
        #[arg(long)]
        params: Option<String>,
        /// Oversample the training rows with SMOTE first.
        #[arg(long)]
        smote: bool,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a saved model on a dataset.
    Evaluate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        preprocessor: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Run a full experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output_dir.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Write a seeded synthetic KDD-format file for trying the pipeline.
    Synth {
        #[arg(long, default_value_t = 10_000)]
        rows: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-render a saved report.json.
    Report {
        report: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        Self::new(e.exit_code() as u8, e.to_string())
    }
}

impl From<PreprocessError> for CliError {
    fn from(e: PreprocessError) -> Self {
        Self::new(DATA_ERROR, format!("preprocess stage: {e}"))
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let code = match e {
            ModelError::InvalidParams(_) => USAGE_ERROR,
            ModelError::DimensionMismatch { .. } | ModelError::Document(_) => DATA_ERROR,
            _ => INTERNAL_ERROR,
        };
        Self::new(code, e.to_string())
    }
}

fn load(input: &Input) -> Result<kdd::RawDataset, CliError> {
    let path = resolve_data_path(&input.data);
    let (raw, _) = harness::load_raw(&path, !input.lenient, !input.no_dedup, input.label_mode.into())?;
    Ok(raw)
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body)
        .map_err(|e| CliError::new(INTERNAL_ERROR, format!("{}: {e}", path.display())))
}

fn json(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn model_kind(kind: Kind, params: Option<&str>) -> Result<ModelKind, CliError> {
    let params = params.unwrap_or("{}");
    let bad = |e: serde_json::Error| CliError::new(USAGE_ERROR, format!("--params: {e}"));
    Ok(match kind {
        Kind::DecisionTree => ModelKind::DecisionTree { params: serde_json::from_str(params).map_err(bad)? },
        Kind::RandomForest => ModelKind::RandomForest { params: serde_json::from_str(params).map_err(bad)? },
        Kind::Svm => ModelKind::Svm { params: serde_json::from_str(params).map_err(bad)? },
    })
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { input } => {
            let raw = load(&input)?;
            let summary = serde_json::json!({
                "provenance": raw.provenance,
                "classes": kdd::class_inventory(&raw),
            });
            println!("{}", json(&summary));
        }
        Command::Preprocess { input, scaler_scope, out } => {
            let raw = load(&input)?;
            let state = PreprocessorState::fit_encoders(&raw, input.label_mode.into());
            let encoded = preprocess::encode(&raw, &state)?;
            let scope = match scaler_scope {
                Scope::AllColumns => ScalerScope::AllColumns,
                Scope::NumericOnly => ScalerScope::NumericOnly,
            };
            let state = state.with_scaler(preprocess::fit_scaler(&encoded, scope)?);
            state.save(&out)?;
            eprintln!("preprocessor {} written to {}", state.fingerprint(), out.display());
        }
        Command::Train { input, preprocessor, model, params, smote: use_smote, name, out } => {
            let state = PreprocessorState::load(&preprocessor)?;
            let raw = load(&input)?;
            let mut train = preprocess::transform(&raw, &state)?;
            if use_smote {
                let (resampled, report) = smote::smote_resample(&train, &SmoteConfig::default())
                    .map_err(HarnessError::from)?;
                eprintln!("smote added {} rows", report.total_synthetic());
                train = resampled;
            }
            let spec = ModelSpec {
                name: name.unwrap_or_else(|| "model".into()),
                smote: use_smote,
                model: model_kind(model, params.as_deref())?,
            };
            let fitted = harness::fit_model(&spec, &train)?;
            let doc = ModelDocument::new(&spec.name, &train, Some(state.fingerprint()), fitted);
            write(&out, &doc.to_json())?;
            eprintln!("{} model written to {}", doc.model.kind(), out.display());
        }
        Command::Evaluate { input, preprocessor, model } => {
            let state = PreprocessorState::load(&preprocessor)?;
            let doc = ModelDocument::load(&model)?;
            if doc.preprocessor_fingerprint.as_deref().is_some_and(|f| f != state.fingerprint()) {
                log::warn!("model was trained behind a different preprocessor");
            }
            let raw = load(&input)?;
            let ds = preprocess::transform(&raw, &state)?;
            let pred = doc.model.predict_dataset(&ds)?;
            let cm = metrics::confusion(ds.y(), &pred, ds.class_names())
                .map_err(|e| CliError::new(DATA_ERROR, e.to_string()))?;
            let bundle = metrics::compute_metrics(&cm)
                .map_err(|e| CliError::new(DATA_ERROR, e.to_string()))?;
            println!("{}", json(&serde_json::json!({ "metrics": bundle, "confusion": cm })));
        }
        Command::Run { config, output_dir } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let report = harness::run_experiment(&cfg)?;
            print!("{}", report.to_table());
            eprintln!("results written to {}", cfg.output_dir.display());
        }
        Command::Synth { rows, seed, out } => {
            write(&out, &ztids::synth::generate_text(rows, seed))?;
        }
        Command::Report { report, format } => {
            let report = EvaluationReport::load(&report)?;
            match format {
                Format::Table => print!("{}", report.to_table()),
                Format::Csv => print!("{}", report.to_csv()),
                Format::Json => println!("{}", report.to_json()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

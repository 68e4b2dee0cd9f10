use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::HarnessError;
use crate::kdd::Provenance;
use crate::metrics::{ConfusionMatrix, MetricsBundle};
use crate::smote::ResampleReport;

pub const CSV_FILE: &str = "report.csv";
pub const JSON_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub name: String,
    pub kind: String,
    pub smote: bool,
    /// Accuracy on the (real, pre-SMOTE) training partition.
    pub train_score: f64,
    /// Accuracy on the test partition.
    pub test_score: f64,
    /// Weighted F1 on the test partition.
    pub f1_score: f64,
    pub rows_trained_on: usize,
    pub subsample_cap: Option<usize>,
    pub test_metrics: MetricsBundle,
    pub test_confusion: ConfusionMatrix,
    pub feature_importances: Option<Vec<(String, f64)>>,
    pub model_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunProvenance {
    pub dataset_path: String,
    pub dataset_sha256: String,
    pub ingest: Provenance,
    pub class_counts: Vec<(String, usize)>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_class_counts: Vec<usize>,
    pub test_class_counts: Vec<usize>,
    pub preprocessor_fingerprint: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub stages: Vec<StageTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rows: Vec<ModelRow>,
    pub resample: Option<ResampleReport>,
    pub config: ExperimentConfig,
    pub provenance: RunProvenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Table,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

impl EvaluationReport {
    /// `Model,TrainScore,TestScore,F1Score`, six decimals, config order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Model,TrainScore,TestScore,F1Score\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6}",
                csv_field(&r.name),
                r.train_score,
                r.test_score,
                r.f1_score
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Report(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn to_table(&self) -> String {
        let header = ["Model", "Train Score", "Test Score", "F1 Score"];
        let rows: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.name.clone(),
                    format!("{:.6}", r.train_score),
                    format!("{:.6}", r.test_score),
                    format!("{:.6}", r.f1_score),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for r in &rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let line = |cells: [&str; 4], out: &mut String| {
            let _ = writeln!(
                out,
                "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}",
                cells[0],
                cells[1],
                cells[2],
                cells[3],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2],
                w3 = widths[3]
            );
        };
        line(header, &mut out);
        let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 6));
        for r in &rows {
            line([&r[0], &r[1], &r[2], &r[3]], &mut out);
        }
        out
    }
}

/// Writes the requested formats into `dir`. The table is returned rather
/// than written.
pub fn emit_report(
    report: &EvaluationReport,
    dir: &Path,
    formats: &[ReportFormat],
) -> Result<(Vec<PathBuf>, Option<String>), HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    let mut table = None;
    for f in formats {
        let (name, body) = match f {
            ReportFormat::Csv => (CSV_FILE, report.to_csv()),
            ReportFormat::Json => (JSON_FILE, report.to_json()),
            ReportFormat::Table => {
                table = Some(report.to_table());
                continue;
            }
        };
        let path = dir.join(name);
        fs::write(&path, body).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        written.push(path);
    }
    Ok((written, table))
}

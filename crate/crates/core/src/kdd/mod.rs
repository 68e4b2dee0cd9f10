//! KDD Cup 1999 ingestion: parsing connection records, exact-duplicate
//! removal and label mapping.
//!
//! Records keep the exact text they were read from so that re-serializing a
//! record reproduces its input line byte for byte.

mod labels;
pub mod schema;

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use labels::{class_inventory, map_labels, LabelMapping, LabelMode};
pub use schema::{is_categorical, CATEGORICAL_COLUMNS, FEATURE_NAMES, N_FEATURES};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("input contains no records")]
    EmptyInput,
    #[error("label {0:?} is not present in the label table")]
    UnknownLabel(String),
    #[error("label table line {line}: {reason}")]
    BadLabelTable { line: usize, reason: String },
    #[error("{path}: {source}")]
    Open { path: String, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One raw KDD connection: 41 feature fields plus the label token.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionRecord {
    features: String,
    values: Box<[f64]>,
    label: String,
}

impl ConnectionRecord {
    /// Parses one comma-separated line (no trailing newline).
    pub fn from_line(line: &str) -> Result<Self, String> {
        let (features, label) = match line.rfind(',') {
            Some(pos) => (&line[..pos], &line[pos + 1..]),
            None => return Err(format!("expected {} fields, found 1", N_FEATURES + 1)),
        };
        let fields: Vec<&str> = features.split(',').collect();
        if fields.len() != N_FEATURES {
            return Err(format!(
                "expected {} fields, found {}",
                N_FEATURES + 1,
                fields.len() + 1
            ));
        }
        let label = label.trim();
        if label.is_empty() {
            return Err("empty label".into());
        }
        let mut values = Vec::with_capacity(N_FEATURES);
        for (i, field) in fields.iter().enumerate() {
            if is_categorical(i) {
                if field.is_empty() {
                    return Err(format!("empty token in column {}", FEATURE_NAMES[i]));
                }
                values.push(f64::NAN);
            } else {
                let v: f64 = field.parse().map_err(|_| {
                    format!("column {}: {field:?} is not a number", FEATURE_NAMES[i])
                })?;
                if !v.is_finite() || v < 0.0 {
                    return Err(format!(
                        "column {}: {field:?} is not a finite non-negative number",
                        FEATURE_NAMES[i]
                    ));
                }
                values.push(v);
            }
        }
        Ok(Self {
            features: features.to_owned(),
            values: values.into_boxed_slice(),
            label: label.to_owned(),
        })
    }

    /// Raw text of feature column `i`.
    pub fn field(&self, i: usize) -> &str {
        self.features
            .split(',')
            .nth(i)
            .expect("record holds exactly N_FEATURES fields")
    }

    /// Parsed value of a numeric column, `None` for token columns.
    pub fn value(&self, i: usize) -> Option<f64> {
        (!is_categorical(i)).then(|| self.values[i])
    }

    pub fn token(&self, i: usize) -> Option<&str> {
        is_categorical(i).then(|| self.field(i))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub(crate) fn set_label(&mut self, label: String) {
        self.label = label;
    }

    /// The 41 feature fields exactly as read, comma-joined.
    pub fn feature_text(&self) -> &str {
        &self.features
    }

    pub fn to_csv_line(&self) -> String {
        format!("{},{}", self.features, self.label)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub lines_read: usize,
    pub skipped: usize,
    pub duplicates_removed: usize,
    pub records: usize,
}

#[derive(Debug, Clone)]
pub struct RawDataset {
    pub records: Vec<ConnectionRecord>,
    pub provenance: Provenance,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Wraps `input` in a gzip decoder when it starts with the gzip magic bytes.
fn maybe_decompress<'a, R: Read + 'a>(input: R) -> io::Result<Box<dyn BufRead + 'a>> {
    let mut reader = BufReader::new(input);
    let head = reader.fill_buf()?;
    if head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(reader))))
    } else {
        Ok(Box::new(reader))
    }
}

/// Parses KDD CSV text (plain or gzip-compressed) into records.
///
/// With `strict` set the first malformed line aborts parsing; otherwise bad
/// lines are logged, counted in the provenance and skipped. Blank lines are
/// ignored in both modes.
pub fn parse_kdd<R: Read>(input: R, source: &str, strict: bool) -> Result<RawDataset, IngestError> {
    let mut reader = maybe_decompress(input)?;
    let mut records = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0usize;
    let mut skipped = 0usize;

    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        while matches!(buf.last(), Some(b'\n' | b'\r')) {
            buf.pop();
        }
        if buf.is_empty() {
            continue;
        }
        let parsed = std::str::from_utf8(&buf)
            .map_err(|e| format!("invalid UTF-8: {e}"))
            .and_then(ConnectionRecord::from_line);
        match parsed {
            Ok(rec) => records.push(rec),
            Err(reason) if strict => {
                return Err(IngestError::MalformedRecord { line: line_no, reason })
            }
            Err(reason) => {
                log::warn!("{source}: skipping line {line_no}: {reason}");
                skipped += 1;
            }
        }
    }

    if records.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    let provenance = Provenance {
        source: source.to_owned(),
        lines_read: line_no,
        skipped,
        duplicates_removed: 0,
        records: records.len(),
    };
    Ok(RawDataset { records, provenance })
}

pub fn parse_kdd_file(path: &Path, strict: bool) -> Result<RawDataset, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Open {
        path: path.display().to_string(),
        source,
    })?;
    parse_kdd(file, &path.display().to_string(), strict)
}

/// Drops records whose features and label are byte-identical to an earlier
/// one, keeping first occurrences in their original order.
pub fn dedup(ds: RawDataset) -> RawDataset {
    let RawDataset { records, mut provenance } = ds;
    let before = records.len();
    let keep: Vec<bool> = {
        let mut seen: HashSet<(&str, &str)> = HashSet::with_capacity(before);
        records
            .iter()
            .map(|r| seen.insert((&r.features, &r.label)))
            .collect()
    };
    let kept: Vec<ConnectionRecord> = records
        .into_iter()
        .zip(keep)
        .filter_map(|(r, k)| k.then_some(r))
        .collect();
    provenance.duplicates_removed += before - kept.len();
    provenance.records = kept.len();
    RawDataset {
        records: kept,
        provenance,
    }
}

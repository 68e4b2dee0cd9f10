use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{IngestError, RawDataset};

const FIVE_CATEGORY_TABLE: &str = include_str!("../../data/attack_categories.tsv");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    /// Keep the raw label token.
    Raw,
    /// normal / dos / probe / r2l / u2r
    #[default]
    FiveCategory,
    /// normal / attack
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMapping {
    pub mode: LabelMode,
    table: BTreeMap<String, String>,
}

impl LabelMapping {
    pub fn new(mode: LabelMode) -> Self {
        match mode {
            LabelMode::Raw => Self::raw(),
            LabelMode::FiveCategory => Self::five_category(),
            LabelMode::Binary => Self::binary(),
        }
    }

    pub fn raw() -> Self {
        Self {
            mode: LabelMode::Raw,
            table: BTreeMap::new(),
        }
    }

    pub fn binary() -> Self {
        Self {
            mode: LabelMode::Binary,
            table: BTreeMap::new(),
        }
    }

    /// The bundled attack-category table.
    pub fn five_category() -> Self {
        Self::from_tsv(FIVE_CATEGORY_TABLE).expect("bundled category table is well formed")
    }

    /// Reads a `token<TAB>category` table; `#` starts a comment line.
    pub fn from_tsv(text: &str) -> Result<Self, IngestError> {
        let mut table = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(tok), Some(cat), None) if !tok.is_empty() && !cat.is_empty() => {
                    table.insert(tok.to_owned(), cat.to_owned());
                }
                _ => {
                    return Err(IngestError::BadLabelTable {
                        line: i + 1,
                        reason: "expected token<TAB>category".into(),
                    })
                }
            }
        }
        Ok(Self {
            mode: LabelMode::FiveCategory,
            table,
        })
    }

    pub fn map(&self, token: &str) -> Result<String, IngestError> {
        match self.mode {
            LabelMode::Raw => Ok(token.to_owned()),
            LabelMode::Binary => Ok(if token.trim_end_matches('.') == "normal" {
                "normal".to_owned()
            } else {
                "attack".to_owned()
            }),
            LabelMode::FiveCategory => self
                .table
                .get(token)
                .or_else(|| self.table.get(&format!("{token}.")))
                .cloned()
                .ok_or_else(|| IngestError::UnknownLabel(token.to_owned())),
        }
    }
}

/// Replaces every record's label by its class name.
pub fn map_labels(ds: RawDataset, mapping: &LabelMapping) -> Result<RawDataset, IngestError> {
    let RawDataset { mut records, provenance } = ds;
    for rec in &mut records {
        let class = mapping.map(rec.label())?;
        rec.set_label(class);
    }
    let out = RawDataset { records, provenance };
    for (class, n) in class_inventory(&out) {
        log::info!("class {class}: {n} records");
    }
    Ok(out)
}

/// Label → record count, in label order.
pub fn class_inventory(ds: &RawDataset) -> BTreeMap<String, usize> {
    let mut inv = BTreeMap::new();
    for rec in &ds.records {
        *inv.entry(rec.label().to_owned()).or_insert(0) += 1;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_category_examples() {
        let m = LabelMapping::five_category();
        assert_eq!(m.map("smurf.").unwrap(), "dos");
        assert_eq!(m.map("neptune.").unwrap(), "dos");
        assert_eq!(m.map("ipsweep.").unwrap(), "probe");
        assert_eq!(m.map("guess_passwd.").unwrap(), "r2l");
        assert_eq!(m.map("buffer_overflow.").unwrap(), "u2r");
        assert_eq!(m.map("normal.").unwrap(), "normal");
        assert!(matches!(m.map("foo."), Err(IngestError::UnknownLabel(t)) if t == "foo."));
    }

    #[test]
    fn bundled_table_covers_the_training_attacks() {
        let m = LabelMapping::five_category();
        for tok in [
            "back", "buffer_overflow", "ftp_write", "guess_passwd", "imap", "ipsweep", "land",
            "loadmodule", "multihop", "neptune", "nmap", "normal", "perl", "phf", "pod",
            "portsweep", "rootkit", "satan", "smurf", "spy", "teardrop", "warezclient",
            "warezmaster",
        ] {
            m.map(&format!("{tok}.")).unwrap();
        }
    }

    #[test]
    fn binary_mode() {
        let m = LabelMapping::binary();
        assert_eq!(m.map("normal.").unwrap(), "normal");
        assert_eq!(m.map("smurf.").unwrap(), "attack");
        assert_eq!(m.map("foo.").unwrap(), "attack");
    }

    #[test]
    fn raw_mode_is_identity() {
        assert_eq!(LabelMapping::raw().map("smurf.").unwrap(), "smurf.");
    }

    #[test]
    fn malformed_table_is_rejected() {
        assert!(LabelMapping::from_tsv("smurf.\tdos\nbroken\n").is_err());
        let m = LabelMapping::from_tsv("# c\nsmurf.\tdos\n").unwrap();
        assert_eq!(m.map("smurf").unwrap(), "dos");
    }
}

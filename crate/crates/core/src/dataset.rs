//! Dense numeric dataset shared by every model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("matrix has {len} values, expected {rows} rows x {cols} columns")]
    Shape { len: usize, rows: usize, cols: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("class id {id} at row {row} is out of range for {n_classes} classes")]
    ClassOutOfRange { row: usize, id: usize, n_classes: usize },
    #[error("class {0:?} has no rows")]
    MissingClass(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    CategoricalEncoded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// Where a row came from: an index into the encoded source data, or SMOTE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowOrigin {
    Source(u32),
    Synthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    x: Vec<f64>,
    y: Vec<usize>,
    class_names: Vec<String>,
    origins: Vec<RowOrigin>,
}

impl Dataset {
    /// Builds a dataset from a row-major matrix; row origins default to
    /// `Source(row index)`.
    pub fn new(
        columns: Vec<Column>,
        x: Vec<f64>,
        y: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self, DatasetError> {
        let origins = (0..y.len() as u32).map(RowOrigin::Source).collect();
        Self::with_origins(columns, x, y, class_names, origins)
    }

    pub fn with_origins(
        columns: Vec<Column>,
        x: Vec<f64>,
        y: Vec<usize>,
        class_names: Vec<String>,
        origins: Vec<RowOrigin>,
    ) -> Result<Self, DatasetError> {
        let cols = columns.len();
        if x.len() != y.len() * cols || origins.len() != y.len() {
            return Err(DatasetError::Shape {
                len: x.len(),
                rows: y.len(),
                cols,
            });
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            return Err(DatasetError::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        let n_classes = class_names.len();
        if let Some((row, &id)) = y.iter().enumerate().find(|(_, &c)| c >= n_classes) {
            return Err(DatasetError::ClassOutOfRange { row, id, n_classes });
        }
        Ok(Self {
            columns,
            x,
            y,
            class_names,
            origins,
        })
    }

    /// Numeric-only dataset with generated column names `f0, f1, ...`.
    pub fn from_matrix(
        n_cols: usize,
        x: Vec<f64>,
        y: Vec<usize>,
        n_classes: usize,
    ) -> Result<Self, DatasetError> {
        let columns = (0..n_cols)
            .map(|i| Column {
                name: format!("f{i}"),
                kind: ColumnKind::Numeric,
            })
            .collect();
        let class_names = (0..n_classes).map(|c| format!("class{c}")).collect();
        Self::new(columns, x, y, class_names)
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub(crate) fn x_mut(&mut self) -> &mut [f64] {
        &mut self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn origins(&self) -> &[RowOrigin] {
        &self.origins
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.x[i * c..(i + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.n_cols().max(1)).take(self.n_rows())
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts
    }

    /// Checks that every class id owns at least one row.
    pub fn check_all_classes_present(&self) -> Result<(), DatasetError> {
        match self.class_counts().iter().position(|&n| n == 0) {
            Some(c) => Err(DatasetError::MissingClass(self.class_names[c].clone())),
            None => Ok(()),
        }
    }

    /// New dataset holding `indices` in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let c = self.n_cols();
        let mut x = Vec::with_capacity(indices.len() * c);
        for &i in indices {
            x.extend_from_slice(self.row(i));
        }
        Dataset {
            columns: self.columns.clone(),
            x,
            y: indices.iter().map(|&i| self.y[i]).collect(),
            class_names: self.class_names.clone(),
            origins: indices.iter().map(|&i| self.origins[i]).collect(),
        }
    }

    /// Appends rows produced elsewhere (SMOTE); they are marked synthetic.
    pub(crate) fn push_synthetic(&mut self, row: &[f64], class: usize) {
        debug_assert_eq!(row.len(), self.n_cols());
        self.x.extend_from_slice(row);
        self.y.push(class);
        self.origins.push(RowOrigin::Synthetic);
    }
}

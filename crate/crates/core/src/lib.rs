//! Intrusion detection on KDD Cup 1999 connection records.
//!
//! The pipeline: [`kdd`] parses and cleans records, [`preprocess`] label-
//! encodes the token columns, splits and standardizes, [`smote`] rebalances
//! the training partition, [`classifiers`] trains CART trees, random forests
//! and one-vs-rest linear SVMs, [`metrics`] scores them, and [`harness`]
//! runs the whole thing from a JSON experiment config.

pub mod classifiers;
pub mod dataset;
pub mod harness;
pub mod kdd;
pub mod metrics;
pub mod preprocess;
pub mod rng;
pub mod smote;
pub mod synth;

pub use dataset::{Column, ColumnKind, Dataset, RowOrigin};

//! Audit of data leakage from oversampling and imputation applied before
//! train/test partitioning.
//!
//! The crate extracts a length-of-stay cohort from MIMIC-III-shaped CSV
//! tables (or generates a synthetic stand-in), then compares cross-validated
//! random-forest AUROC when ADASYN and imputation run inside each training
//! fold versus on the whole dataset before splitting.

pub mod config;
pub mod error;
pub mod etl;
pub mod evaluation;
pub mod experiment;
pub mod model;
pub mod report;
pub mod resampling;
pub mod seed;
pub mod synth;
pub mod tabular;

pub use error::{Error, Result};

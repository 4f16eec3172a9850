//! Dataset representation and train-fitted imputation.
//!
//! Missing cells are stored as `NaN` inside the row-major matrix. All finite
//! values are observed values; no other sentinel is used.

mod impute;
mod io;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use impute::{apply_imputer, fit_imputer, ImputerModel};
pub use io::{read_dataset, sidecar_path, write_dataset, Sidecar};

pub const MISSING: f64 = f64::NAN;

#[inline]
pub fn is_missing(v: f64) -> bool {
    v.is_nan()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Binary,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn binary(name: impl Into<String>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Binary,
        }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Numeric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Original,
    Synthetic,
}

/// Feature matrix with binary labels and per-row provenance.
#[derive(Debug, Clone)]
pub struct Dataset {
    columns: Vec<Column>,
    x: Vec<f64>,
    y: Vec<u8>,
    provenance: Vec<Provenance>,
    pub meta: BTreeMap<String, String>,
}

impl Dataset {
    /// Builds a dataset of original rows from a row-major matrix.
    pub fn new(columns: Vec<Column>, x: Vec<f64>, y: Vec<u8>) -> Result<Self> {
        let provenance = vec![Provenance::Original; y.len()];
        Self::with_provenance(columns, x, y, provenance)
    }

    pub fn with_provenance(
        columns: Vec<Column>,
        x: Vec<f64>,
        y: Vec<u8>,
        provenance: Vec<Provenance>,
    ) -> Result<Self> {
        let p = columns.len();
        let n = y.len();
        if x.len() != n * p {
            return Err(Error::Dataset(format!(
                "matrix has {} cells, expected {n} rows x {p} columns",
                x.len()
            )));
        }
        if provenance.len() != n {
            return Err(Error::Dataset(format!(
                "{} provenance tags for {n} rows",
                provenance.len()
            )));
        }
        if let Some(bad) = y.iter().find(|&&l| l > 1) {
            return Err(Error::Dataset(format!("label {bad} is not 0 or 1")));
        }
        for (c, col) in columns.iter().enumerate() {
            for r in 0..n {
                let v = x[r * p + c];
                if v.is_infinite() {
                    return Err(Error::Dataset(format!(
                        "row {r}, column {}: infinite value",
                        col.name
                    )));
                }
                if col.kind == ColumnKind::Binary && !is_missing(v) && v != 0.0 && v != 1.0 {
                    return Err(Error::Dataset(format!(
                        "row {r}, binary column {}: value {v}",
                        col.name
                    )));
                }
            }
        }
        Ok(Dataset {
            columns,
            x,
            y,
            provenance,
            meta: BTreeMap::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn labels(&self) -> &[u8] {
        &self.y
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let p = self.n_cols();
        &self.x[r * p..(r + 1) * p]
    }

    pub fn value(&self, r: usize, c: usize) -> f64 {
        self.x[r * self.n_cols() + c]
    }

    pub(crate) fn set_value(&mut self, r: usize, c: usize, v: f64) {
        let p = self.n_cols();
        self.x[r * p + c] = v;
    }

    pub fn all_rows(&self) -> Vec<usize> {
        (0..self.n_rows()).collect()
    }

    /// `[negatives, positives]` over the given rows.
    pub fn class_counts(&self, rows: &[usize]) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &r in rows {
            counts[self.y[r] as usize] += 1;
        }
        counts
    }

    pub fn count_missing(&self) -> usize {
        self.x.iter().filter(|v| is_missing(**v)).count()
    }

    /// Returns the index of the first missing cell among `rows`, if any.
    pub fn first_missing(&self, rows: &[usize]) -> Option<(usize, usize)> {
        rows.iter().find_map(|&r| {
            self.row(r)
                .iter()
                .position(|v| is_missing(*v))
                .map(|c| (r, c))
        })
    }

    pub(crate) fn require_complete(&self, rows: &[usize]) -> Result<()> {
        match self.first_missing(rows) {
            Some((row, c)) => Err(Error::MissingValue {
                row,
                column: self.columns[c].name.clone(),
            }),
            None => Ok(()),
        }
    }

    pub fn same_schema(&self, columns: &[Column]) -> bool {
        self.columns == columns
    }

    /// Copies `rows` (in the given order) into a new dataset.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let mut x = Vec::with_capacity(rows.len() * self.n_cols());
        for &r in rows {
            x.extend_from_slice(self.row(r));
        }
        Dataset {
            columns: self.columns.clone(),
            x,
            y: rows.iter().map(|&r| self.y[r]).collect(),
            provenance: rows.iter().map(|&r| self.provenance[r]).collect(),
            meta: self.meta.clone(),
        }
    }

    pub(crate) fn push_row(&mut self, values: &[f64], label: u8, provenance: Provenance) {
        debug_assert_eq!(values.len(), self.n_cols());
        self.x.extend_from_slice(values);
        self.y.push(label);
        self.provenance.push(provenance);
    }
}

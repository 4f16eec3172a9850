use serde::{Deserialize, Serialize};

use super::{is_missing, Column, ColumnKind, Dataset};
use crate::error::{Error, Result};

/// Per-column fill values learned from a set of fitting rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputerModel {
    pub columns: Vec<Column>,
    pub fill: Vec<f64>,
}

/// Mean for numeric columns, mode for binary columns (ties go to 0), computed
/// over the observed cells of `rows` only.
pub fn fit_imputer(ds: &Dataset, rows: &[usize]) -> Result<ImputerModel> {
    if rows.is_empty() {
        return Err(Error::Dataset("cannot fit an imputer on zero rows".into()));
    }
    let mut fill = Vec::with_capacity(ds.n_cols());
    for (c, col) in ds.columns().iter().enumerate() {
        let mut sum = 0.0;
        let mut ones = 0usize;
        let mut observed = 0usize;
        for &r in rows {
            let v = ds.value(r, c);
            if !is_missing(v) {
                sum += v;
                observed += 1;
                if v == 1.0 {
                    ones += 1;
                }
            }
        }
        if observed == 0 {
            return Err(Error::EmptyColumn(col.name.clone()));
        }
        let value = match col.kind {
            ColumnKind::Numeric => sum / observed as f64,
            ColumnKind::Binary => {
                if ones * 2 > observed {
                    1.0
                } else {
                    0.0
                }
            }
        };
        fill.push(value);
    }
    Ok(ImputerModel {
        columns: ds.columns().to_vec(),
        fill,
    })
}

pub fn apply_imputer(ds: &Dataset, model: &ImputerModel) -> Result<Dataset> {
    if !ds.same_schema(&model.columns) {
        return Err(Error::SchemaMismatch(
            "imputer was fitted on a different column layout".into(),
        ));
    }
    let mut out = ds.clone();
    for r in 0..out.n_rows() {
        for (c, &f) in model.fill.iter().enumerate() {
            if is_missing(out.value(r, c)) {
                out.set_value(r, c, f);
            }
        }
    }
    Ok(out)
}

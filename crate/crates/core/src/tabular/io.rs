//! Dataset CSV with a JSON sidecar.
//!
//! The CSV holds one row per sample with the label as the final column;
//! missing cells are empty fields. The sidecar (same stem, `.json`) records
//! column kinds, class counts and free-form metadata.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{is_missing, Column, ColumnKind, Dataset, MISSING};
use crate::error::{Error, Result};

pub const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub columns: Vec<Column>,
    pub n_rows: usize,
    pub n_negative: usize,
    pub n_positive: usize,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn format_cell(v: f64) -> String {
    if is_missing(v) {
        String::new()
    } else {
        // shortest representation that round-trips
        format!("{v}")
    }
}

pub fn write_dataset(ds: &Dataset, csv_path: &Path) -> Result<()> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = ds.columns().iter().map(|c| c.name.as_str()).collect();
    header.push(LABEL_COLUMN);
    w.write_record(&header)?;
    for r in 0..ds.n_rows() {
        let mut rec: Vec<String> = ds.row(r).iter().map(|&v| format_cell(v)).collect();
        rec.push(ds.labels()[r].to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(csv_path, e))?;

    let [n_negative, n_positive] = ds.class_counts(&ds.all_rows());
    let sidecar = Sidecar {
        columns: ds.columns().to_vec(),
        n_rows: ds.n_rows(),
        n_negative,
        n_positive,
        meta: ds.meta.clone(),
    };
    let path = sidecar_path(csv_path);
    let text = serde_json::to_string_pretty(&sidecar)?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

/// Reads a dataset CSV. Column kinds come from the sidecar when present,
/// otherwise a column is binary iff every observed cell is 0 or 1.
pub fn read_dataset(csv_path: &Path) -> Result<Dataset> {
    let side_path = sidecar_path(csv_path);
    let sidecar: Option<Sidecar> = if side_path.exists() {
        let text = fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?;
        Some(serde_json::from_str(&text)?)
    } else {
        None
    };

    let file = fs::File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let Some((label_name, feature_names)) = header.split_last() else {
        return Err(Error::Dataset("empty header".into()));
    };
    if label_name != LABEL_COLUMN {
        return Err(Error::Dataset(format!(
            "final column must be `{LABEL_COLUMN}`, found `{label_name}`"
        )));
    }
    let p = feature_names.len();

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != p + 1 {
            return Err(Error::Dataset(format!(
                "data row {i}: {} fields, expected {}",
                rec.len(),
                p + 1
            )));
        }
        for cell in rec.iter().take(p) {
            let cell = cell.trim();
            let v = if cell.is_empty() {
                MISSING
            } else {
                cell.parse::<f64>()
                    .map_err(|_| Error::Dataset(format!("data row {i}: cannot parse `{cell}`")))?
            };
            x.push(v);
        }
        let label = rec[p].trim();
        y.push(match label {
            "0" => 0,
            "1" => 1,
            other => return Err(Error::Dataset(format!("data row {i}: label `{other}`"))),
        });
    }

    let (columns, meta) = match sidecar {
        Some(s) => {
            let names: Vec<&str> = s.columns.iter().map(|c| c.name.as_str()).collect();
            if names != feature_names.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(Error::SchemaMismatch(format!(
                    "{} disagrees with the CSV header",
                    side_path.display()
                )));
            }
            (s.columns, s.meta)
        }
        None => {
            let columns = feature_names
                .iter()
                .enumerate()
                .map(|(c, name)| {
                    let binary = (0..y.len()).all(|r| {
                        let v = x[r * p + c];
                        is_missing(v) || v == 0.0 || v == 1.0
                    });
                    Column {
                        name: name.clone(),
                        kind: if binary {
                            ColumnKind::Binary
                        } else {
                            ColumnKind::Numeric
                        },
                    }
                })
                .collect();
            (columns, BTreeMap::new())
        }
    };
    let mut ds = Dataset::new(columns, x, y)?;
    ds.meta = meta;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Dataset {
        let cols = vec![Column::binary("med:heparin"), Column::numeric("lab:ph")];
        let mut ds =
            Dataset::new(cols, vec![1.0, 7.25, 0.0, MISSING, 1.0, 0.1], vec![0, 1, 0]).unwrap();
        ds.meta.insert("source".into(), "unit".into());
        ds
    }

    #[test]
    fn round_trip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let ds = sample();
        write_dataset(&ds, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "med:heparin,lab:ph,label\n1,7.25,0\n0,,1\n1,0.1,0\n");
        let back = read_dataset(&path).unwrap();
        assert_eq!(back.columns(), ds.columns());
        assert_eq!(back.labels(), ds.labels());
        assert_eq!(back.meta, ds.meta);
        assert!(is_missing(back.value(1, 1)));
        assert_eq!(back.value(2, 1), 0.1);
    }

    #[test]
    fn kinds_inferred_without_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plain.csv");
        fs::write(&path, "a,b,label\n0,2.5,1\n1,,0\n,3,0\n").unwrap();
        let ds = read_dataset(&path).unwrap();
        assert_eq!(ds.columns()[0].kind, ColumnKind::Binary);
        assert_eq!(ds.columns()[1].kind, ColumnKind::Numeric);
        assert_eq!(ds.count_missing(), 2);
    }

    #[test]
    fn bad_label_column_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "a,target\n0,1\n").unwrap();
        assert!(read_dataset(&path).is_err());
        fs::write(&path, "a,label\n0,2\n").unwrap();
        assert!(read_dataset(&path).is_err());
    }
}

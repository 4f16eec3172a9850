//! JSON and markdown rendering of experiment reports.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::StdKind;
use crate::experiment::{
    DatasetFingerprint, ExperimentReport, FoldResult, RunConfig, Setup, SkippedFold,
};
use crate::model::ForestConfig;
use crate::resampling::AdasynConfig;

pub const JSON_FILE: &str = "report.json";
pub const TABLE_FILE: &str = "report.md";

/// Run parameters shared by every setup in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub folds: usize,
    pub holdout_test_fraction: f64,
    pub k_neighbors: usize,
    pub beta: f64,
    pub forest: ForestEcho,
    pub master_seed: u64,
    pub repeats: usize,
    pub std_kind: StdKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestEcho {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub mtry: Option<usize>,
    pub bootstrap: bool,
}

impl From<&RunConfig> for ConfigEcho {
    fn from(c: &RunConfig) -> Self {
        let AdasynConfig {
            k_neighbors, beta, ..
        } = c.adasyn;
        let ForestConfig {
            n_trees,
            max_depth,
            min_leaf,
            mtry,
            bootstrap,
            ..
        } = c.forest;
        ConfigEcho {
            folds: c.folds,
            holdout_test_fraction: c.holdout_test_fraction,
            k_neighbors,
            beta,
            forest: ForestEcho {
                n_trees,
                max_depth,
                min_leaf,
                mtry,
                bootstrap,
            },
            master_seed: c.master_seed,
            repeats: c.repeats,
            std_kind: c.std_kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupEntry {
    pub name: Setup,
    pub folds: Vec<FoldResult>,
    pub mean_auroc: f64,
    pub std_auroc: f64,
    pub skipped: Vec<SkippedFold>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub synthetic_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub config: ConfigEcho,
    pub dataset_fingerprint: DatasetFingerprint,
    pub setups: Vec<SetupEntry>,
}

impl ReportFile {
    /// Collects reports in canonical setup order: (i), (ii), (iii), holdout.
    pub fn from_reports(reports: &[ExperimentReport]) -> Result<Self> {
        let first = reports.first().ok_or(Error::EmptyReport)?;
        let mut setups: Vec<SetupEntry> = reports
            .iter()
            .map(|r| SetupEntry {
                name: r.setup,
                folds: r.folds.clone(),
                mean_auroc: r.mean_auroc,
                std_auroc: r.std_auroc,
                skipped: r.skipped.clone(),
                warnings: r.warnings.clone(),
                synthetic_rows: r.synthetic_rows,
            })
            .collect();
        setups.sort_by_key(|s| s.name);
        Ok(ReportFile {
            config: ConfigEcho::from(&first.config),
            dataset_fingerprint: first.dataset_fingerprint.clone(),
            setups,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_markdown(&self) -> String {
        let fp = &self.dataset_fingerprint;
        let mut s = String::new();
        s.push_str("# Cross-validated AUROC by setup\n\n");
        s.push_str(&format!(
            "Dataset: {} rows, {} columns, {} negative / {} positive, {} missing cells. \
             Folds: {}, repeats: {}, seed: {}.\n\n",
            fp.n_rows,
            fp.n_columns,
            fp.class_counts[0],
            fp.class_counts[1],
            fp.missing_cells,
            self.config.folds,
            self.config.repeats,
            self.config.master_seed,
        ));
        s.push_str("| Method | AUROC (in %) |\n|---|---|\n");
        for e in &self.setups {
            s.push_str(&format!(
                "| {} | {:.2} ± {:.2} |\n",
                e.name.method_label(),
                100.0 * e.mean_auroc,
                100.0 * e.std_auroc
            ));
        }
        s.push('\n');
        for e in &self.setups {
            let flagged = e.folds.iter().filter(|f| f.contamination.flagged).count();
            s.push_str(&format!(
                "- {}: {} evaluated, {} skipped, {} flagged as contaminated, {} synthetic rows generated\n",
                e.name,
                e.folds.len(),
                e.skipped.len(),
                flagged,
                e.synthetic_rows
            ));
        }
        s
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `report.json` and `report.md` into `out`.
pub fn render_report(reports: &[ExperimentReport], out: &Path) -> Result<(PathBuf, PathBuf)> {
    let file = ReportFile::from_reports(reports)?;
    write_report_file(&file, out)
}

pub fn write_report_file(file: &ReportFile, out: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let json = out.join(JSON_FILE);
    let table = out.join(TABLE_FILE);
    write(&json, &file.to_json()?)?;
    write(&table, &file.to_markdown())?;
    Ok((json, table))
}

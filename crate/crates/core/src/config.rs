//! `key = value` run configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Recognised keys:
//!
//! ```text
//! folds, seed, repeats, beta, k_neighbors, trees, max_depth, min_leaf,
//! mtry, bootstrap, holdout_test_fraction, std (sample|population)
//! cohort.diagnosis_keyword, cohort.icd9_prefixes, cohort.los_threshold_days,
//! cohort.age_cutoff_years, cohort.medication_keys, cohort.lab_keys
//! schema.<TABLE>.file, schema.<TABLE>.<field>
//! ```

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::etl::{CohortConfig, Schema};
use crate::evaluation::StdKind;
use crate::experiment::RunConfig;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub run: RunConfig,
    pub cohort: CohortConfig,
    pub schema: Schema,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "`{key}`: expected a boolean, got `{value}`"
        ))),
    }
}

/// `none`/`auto`/`unlimited` map to `None`.
fn parse_optional(key: &str, value: &str) -> Result<Option<usize>> {
    match value.to_ascii_lowercase().as_str() {
        "none" | "auto" | "unlimited" => Ok(None),
        _ => parse(key, value).map(Some),
    }
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = FileConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if let Some(rest) = key.strip_prefix("schema.") {
            return self.schema.set(rest, value);
        }
        let run = &mut self.run;
        let cohort = &mut self.cohort;
        match key {
            "folds" => run.folds = parse(key, value)?,
            "seed" => run.master_seed = parse(key, value)?,
            "repeats" => run.repeats = parse(key, value)?,
            "holdout_test_fraction" => run.holdout_test_fraction = parse(key, value)?,
            "std" => {
                run.std_kind = match value {
                    "sample" => StdKind::Sample,
                    "population" => StdKind::Population,
                    _ => return Err(Error::Config(format!("`std`: unknown kind `{value}`"))),
                }
            }
            "beta" => run.adasyn.beta = parse(key, value)?,
            "k_neighbors" => run.adasyn.k_neighbors = parse(key, value)?,
            "trees" => run.forest.n_trees = parse(key, value)?,
            "max_depth" => run.forest.max_depth = parse_optional(key, value)?,
            "min_leaf" => run.forest.min_leaf = parse(key, value)?,
            "mtry" => run.forest.mtry = parse_optional(key, value)?,
            "bootstrap" => run.forest.bootstrap = parse_bool(key, value)?,
            "cohort.diagnosis_keyword" => cohort.diagnosis_keyword = value.to_owned(),
            "cohort.icd9_prefixes" => cohort.icd9_prefixes = list(value),
            "cohort.los_threshold_days" => cohort.los_threshold_days = parse(key, value)?,
            "cohort.age_cutoff_years" => cohort.age_cutoff_years = parse(key, value)?,
            "cohort.medication_keys" => cohort.medication_keys = list(value),
            "cohort.lab_keys" => cohort.lab_keys = list(value),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }
}

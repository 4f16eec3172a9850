//! The three cross-validated setups and the leaky 70/30 holdout.
//!
//! All randomness is derived from `master_seed`:
//!
//! ```text
//! repeat r     -> derive(master, "repeat", r)
//! fold plan    -> derive(repeat, "folds", 0)
//! ADASYN, f    -> derive(repeat, "adasyn", f)      (whole-data: f = u64::MAX)
//! forest, f    -> derive(repeat, "forest", f)
//! holdout      -> derive(repeat, "holdout", 0)
//! ```
//!
//! so setups (i) and (ii) share fold plans and forest seeds exactly, and a
//! fold's result never depends on which other folds ran before it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{
    auroc, confusion_matrix, contamination_check, stratified_holdout, stratified_kfold, summarize,
    Confusion, ContaminationReport, FoldPlan, StdKind, DEFAULT_THRESHOLD,
};
use crate::model::{predict_proba, train_forest, ForestConfig};
use crate::resampling::{adasyn, AdasynConfig};
use crate::seed::derive_seed;
use crate::tabular::{apply_imputer, fit_imputer, Dataset, ImputerModel, Provenance};

const WHOLE_DATA: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setup {
    AfterPartitioning,
    NoOversampling,
    BeforePartitioning,
    LeakyHoldout,
}

impl Setup {
    pub const ALL: [Setup; 4] = [
        Setup::AfterPartitioning,
        Setup::NoOversampling,
        Setup::BeforePartitioning,
        Setup::LeakyHoldout,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Setup::AfterPartitioning => "after_partitioning",
            Setup::NoOversampling => "no_oversampling",
            Setup::BeforePartitioning => "before_partitioning",
            Setup::LeakyHoldout => "leaky_holdout",
        }
    }

    /// Row label used in the rendered results table.
    pub fn method_label(self) -> &'static str {
        match self {
            Setup::AfterPartitioning => "(i) imputation + oversampling after partitioning",
            Setup::NoOversampling => "(ii) no oversampling",
            Setup::BeforePartitioning => "(iii) imputation + oversampling before partitioning",
            Setup::LeakyHoldout => "(iv) oversampling before a 70/30 holdout split",
        }
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Setup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" | "1" | "after" | "after_partitioning" => Ok(Setup::AfterPartitioning),
            "ii" | "2" | "none" | "no_oversampling" => Ok(Setup::NoOversampling),
            "iii" | "3" | "before" | "before_partitioning" => Ok(Setup::BeforePartitioning),
            "holdout" | "leaky_holdout" => Ok(Setup::LeakyHoldout),
            other => Err(Error::Config(format!("unknown setup `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub setup: Setup,
    pub folds: usize,
    pub holdout_test_fraction: f64,
    /// `seed` is ignored; per-fold seeds come from `master_seed`.
    pub adasyn: AdasynConfig,
    /// `seed` is ignored; per-fold seeds come from `master_seed`.
    pub forest: ForestConfig,
    pub master_seed: u64,
    pub repeats: usize,
    pub std_kind: StdKind,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            setup: Setup::AfterPartitioning,
            folds: 10,
            holdout_test_fraction: 0.30,
            adasyn: AdasynConfig::default(),
            forest: ForestConfig::default(),
            master_seed: 0,
            repeats: 1,
            std_kind: StdKind::Sample,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "folds must be >= 2, got {}",
                self.folds
            )));
        }
        if !(self.holdout_test_fraction > 0.0 && self.holdout_test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "holdout test fraction {} outside (0, 1)",
                self.holdout_test_fraction
            )));
        }
        if self.repeats < 1 {
            return Err(Error::Config("repeats must be >= 1".into()));
        }
        self.adasyn.validate()?;
        self.forest.validate()
    }

    pub fn with_setup(&self, setup: Setup) -> RunConfig {
        RunConfig {
            setup,
            ..self.clone()
        }
    }

    fn repeat_seed(&self, repeat: usize) -> u64 {
        derive_seed(self.master_seed, "repeat", repeat as u64)
    }

    fn adasyn_for(&self, repeat_seed: u64, fold: u64) -> AdasynConfig {
        AdasynConfig {
            seed: derive_seed(repeat_seed, "adasyn", fold),
            ..self.adasyn
        }
    }

    fn forest_for(&self, repeat_seed: u64, fold: u64) -> ForestConfig {
        ForestConfig {
            seed: derive_seed(repeat_seed, "forest", fold),
            ..self.forest
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub n_rows: usize,
    pub n_columns: usize,
    /// `[negatives, positives]`
    pub class_counts: [usize; 2],
    pub missing_cells: usize,
}

impl DatasetFingerprint {
    pub fn of(ds: &Dataset) -> Self {
        DatasetFingerprint {
            n_rows: ds.n_rows(),
            n_columns: ds.n_cols(),
            class_counts: ds.class_counts(&ds.all_rows()),
            missing_cells: ds.count_missing(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub repeat: usize,
    pub fold: usize,
    pub auroc: f64,
    pub confusion: Confusion,
    pub contamination: ContaminationReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedFold {
    pub repeat: usize,
    pub fold: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub setup: Setup,
    pub config: RunConfig,
    pub dataset_fingerprint: DatasetFingerprint,
    pub folds: Vec<FoldResult>,
    pub mean_auroc: f64,
    pub std_auroc: f64,
    pub skipped: Vec<SkippedFold>,
    pub warnings: Vec<String>,
    /// Synthetic rows generated over the whole run.
    pub synthetic_rows: usize,
}

impl ExperimentReport {
    pub fn flagged_folds(&self) -> usize {
        self.folds
            .iter()
            .filter(|f| f.contamination.flagged)
            .count()
    }
}

fn check_input(ds: &Dataset, cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    if ds.provenance().iter().any(|p| *p != Provenance::Original) {
        return Err(Error::Dataset(
            "experiment input must contain original rows only".into(),
        ));
    }
    let counts = ds.class_counts(&ds.all_rows());
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// The stratified fold plan over the original rows used by setups (i) and
/// (ii) in `repeat`.
pub fn fold_plan(ds: &Dataset, cfg: &RunConfig, repeat: usize) -> Result<FoldPlan> {
    let seed = derive_seed(cfg.repeat_seed(repeat), "folds", 0);
    stratified_kfold(ds.labels(), cfg.folds, seed)
}

/// Imputer for one fold of setups (i)/(ii): fitted on the fold's training
/// rows only.
pub fn fold_imputer(ds: &Dataset, plan: &FoldPlan, fold: usize) -> Result<ImputerModel> {
    fit_imputer(ds, &plan.train_rows(fold))
}

type FoldOutcome = std::result::Result<FoldResult, SkippedFold>;

/// Trains on `train_rows` of `train_ds` and scores `test_rows` of `eval_ds`.
#[allow(clippy::too_many_arguments)]
fn evaluate_fold(
    train_ds: &Dataset,
    train_rows: &[usize],
    eval_ds: &Dataset,
    test_rows: &[usize],
    forest: &ForestConfig,
    original_counts: [usize; 2],
    repeat: usize,
    fold: usize,
) -> Result<FoldOutcome> {
    let labels: Vec<u8> = test_rows.iter().map(|&r| eval_ds.labels()[r]).collect();
    if !(labels.contains(&0) && labels.contains(&1)) {
        return Ok(Err(SkippedFold {
            repeat,
            fold,
            reason: Error::UndefinedAuroc.to_string(),
        }));
    }
    let model = train_forest(train_ds, train_rows, forest)?;
    let scores = predict_proba(&model, eval_ds, test_rows)?;
    let provenance: Vec<Provenance> = test_rows.iter().map(|&r| eval_ds.provenance()[r]).collect();
    Ok(Ok(FoldResult {
        repeat,
        fold,
        auroc: auroc(&scores, &labels)?,
        confusion: confusion_matrix(&scores, &labels, DEFAULT_THRESHOLD)?,
        contamination: contamination_check(&provenance, &labels, original_counts),
    }))
}

#[derive(Default)]
struct Collector {
    folds: Vec<FoldResult>,
    skipped: Vec<SkippedFold>,
    warnings: Vec<String>,
    synthetic_rows: usize,
}

impl Collector {
    fn push(&mut self, outcome: FoldOutcome) {
        match outcome {
            Ok(f) => self.folds.push(f),
            Err(s) => self.skipped.push(s),
        }
    }

    fn finish(self, ds: &Dataset, cfg: &RunConfig) -> Result<ExperimentReport> {
        let values: Vec<f64> = self.folds.iter().map(|f| f.auroc).collect();
        if values.is_empty() {
            return Err(Error::Dataset(format!(
                "{}: every fold was skipped; no AUROC could be computed",
                cfg.setup
            )));
        }
        let s = summarize(&values, cfg.std_kind)?;
        Ok(ExperimentReport {
            setup: cfg.setup,
            config: cfg.clone(),
            dataset_fingerprint: DatasetFingerprint::of(ds),
            folds: self.folds,
            mean_auroc: s.mean,
            std_auroc: s.std,
            skipped: self.skipped,
            warnings: self.warnings,
            synthetic_rows: self.synthetic_rows,
        })
    }
}

fn warn_once(warnings: &mut Vec<String>, new: &[String]) {
    for w in new {
        if !warnings.contains(w) {
            warnings.push(w.clone());
        }
    }
}

/// Runs `cfg.setup` on `ds` and reports per-fold and pooled AUROC.
pub fn run_setup(ds: &Dataset, cfg: &RunConfig) -> Result<ExperimentReport> {
    check_input(ds, cfg)?;
    match cfg.setup {
        Setup::AfterPartitioning | Setup::NoOversampling => run_partitioned(ds, cfg),
        Setup::BeforePartitioning => run_before_partitioning(ds, cfg),
        Setup::LeakyHoldout => run_leaky_holdout(ds, cfg),
    }
}

fn run_partitioned(ds: &Dataset, cfg: &RunConfig) -> Result<ExperimentReport> {
    let oversample = cfg.setup == Setup::AfterPartitioning;
    let original = ds.class_counts(&ds.all_rows());
    let mut out = Collector::default();
    for repeat in 0..cfg.repeats {
        let rs = cfg.repeat_seed(repeat);
        let plan = fold_plan(ds, cfg, repeat)?;
        warn_once(&mut out.warnings, &plan.warnings);
        for fold in 0..plan.k {
            let train = plan.train_rows(fold);
            let imputed = apply_imputer(ds, &fold_imputer(ds, &plan, fold)?)?;
            let forest = cfg.forest_for(rs, fold as u64);
            let evaluated = if oversample {
                let augmented = adasyn(&imputed, &train, &cfg.adasyn_for(rs, fold as u64))?;
                out.synthetic_rows += augmented.n_rows() - train.len();
                evaluate_fold(
                    &augmented,
                    &augmented.all_rows(),
                    &imputed,
                    plan.test_rows(fold),
                    &forest,
                    original,
                    repeat,
                    fold,
                )?
            } else {
                evaluate_fold(
                    &imputed,
                    &train,
                    &imputed,
                    plan.test_rows(fold),
                    &forest,
                    original,
                    repeat,
                    fold,
                )?
            };
            out.push(evaluated);
        }
    }
    out.finish(ds, cfg)
}

fn impute_and_balance_all(ds: &Dataset, cfg: &RunConfig, rs: u64) -> Result<Dataset> {
    let all = ds.all_rows();
    let imputed = apply_imputer(ds, &fit_imputer(ds, &all)?)?;
    adasyn(&imputed, &all, &cfg.adasyn_for(rs, WHOLE_DATA))
}

fn run_before_partitioning(ds: &Dataset, cfg: &RunConfig) -> Result<ExperimentReport> {
    let original = ds.class_counts(&ds.all_rows());
    let mut out = Collector::default();
    for repeat in 0..cfg.repeats {
        let rs = cfg.repeat_seed(repeat);
        let augmented = impute_and_balance_all(ds, cfg, rs)?;
        out.synthetic_rows += augmented.n_rows() - ds.n_rows();
        let plan = stratified_kfold(augmented.labels(), cfg.folds, derive_seed(rs, "folds", 0))?;
        warn_once(&mut out.warnings, &plan.warnings);
        for fold in 0..plan.k {
            out.push(evaluate_fold(
                &augmented,
                &plan.train_rows(fold),
                &augmented,
                plan.test_rows(fold),
                &cfg.forest_for(rs, fold as u64),
                original,
                repeat,
                fold,
            )?);
        }
    }
    out.finish(ds, cfg)
}

/// Imputes and balances the whole dataset, then makes one stratified
/// train/test split of the balanced data. Both sides therefore carry
/// synthetic rows.
pub fn run_leaky_holdout(ds: &Dataset, cfg: &RunConfig) -> Result<ExperimentReport> {
    let cfg = &cfg.with_setup(Setup::LeakyHoldout);
    check_input(ds, cfg)?;
    let original = ds.class_counts(&ds.all_rows());
    let mut out = Collector::default();
    for repeat in 0..cfg.repeats {
        let rs = cfg.repeat_seed(repeat);
        let augmented = impute_and_balance_all(ds, cfg, rs)?;
        out.synthetic_rows += augmented.n_rows() - ds.n_rows();
        let (train, test) = stratified_holdout(
            augmented.labels(),
            cfg.holdout_test_fraction,
            derive_seed(rs, "holdout", 0),
        )?;
        out.push(evaluate_fold(
            &augmented,
            &train,
            &augmented,
            &test,
            &cfg.forest_for(rs, 0),
            original,
            repeat,
            0,
        )?);
    }
    out.finish(ds, cfg)
}

/// Runs each setup in `setups` on the same dataset and master seed.
pub fn run_setups(
    ds: &Dataset,
    cfg: &RunConfig,
    setups: &[Setup],
) -> Result<Vec<ExperimentReport>> {
    setups
        .iter()
        .map(|&s| run_setup(ds, &cfg.with_setup(s)))
        .collect()
}

//! Cohort selection and per-patient feature construction.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use super::tables::{Admission, IcuStay, Id, RawTables};
use crate::error::{Error, Result};
use crate::tabular::{Column, Dataset, MISSING};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortConfig {
    pub diagnosis_keyword: String,
    pub icd9_prefixes: Vec<String>,
    pub los_threshold_days: f64,
    pub age_cutoff_years: f64,
    pub medication_keys: Vec<String>,
    pub lab_keys: Vec<String>,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            diagnosis_keyword: "cancer".into(),
            icd9_prefixes: vec!["162".into()],
            los_threshold_days: 7.0,
            age_cutoff_years: 60.0,
            medication_keys: Vec::new(),
            lab_keys: Vec::new(),
        }
    }
}

impl CohortConfig {
    pub fn validate(&self) -> Result<()> {
        if self.los_threshold_days.is_nan() || self.los_threshold_days <= 0.0 {
            return Err(Error::Config("los_threshold_days must be positive".into()));
        }
        if self.icd9_prefixes.is_empty() {
            return Err(Error::Config("icd9_prefixes must not be empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortRow {
    pub subject_id: Id,
    pub last_hadm_id: Id,
    pub last_icustay_id: Id,
    pub los: f64,
    pub gender: Option<String>,
    pub age_years: Option<f64>,
    pub admission_type: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CohortTable {
    pub rows: Vec<CohortRow>,
}

impl CohortTable {
    pub fn subject_ids(&self) -> Vec<Id> {
        self.rows.iter().map(|r| r.subject_id).collect()
    }
}

/// Lowercases and removes whitespace, for key matching.
pub fn normalize_key(s: &str) -> String {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect()
}

fn icd9_matches(code: &str, prefixes: &[String]) -> bool {
    let code: String = code
        .chars()
        .filter(|c| *c != '.' && !c.is_whitespace())
        .collect();
    prefixes.iter().any(|p| {
        let p: String = p.chars().filter(|c| *c != '.').collect();
        code.starts_with(&p)
    })
}

/// Whole years between `dob` and `at`.
pub fn age_in_years(dob: NaiveDateTime, at: NaiveDateTime) -> i64 {
    let mut years = i64::from(at.year()) - i64::from(dob.year());
    let before_birthday = (at.month(), at.day(), at.num_seconds_from_midnight())
        < (dob.month(), dob.day(), dob.num_seconds_from_midnight());
    if before_birthday {
        years -= 1;
    }
    years
}

/// 1 for a stay strictly longer than `threshold` days.
pub fn label_los(los: f64, threshold: f64) -> Result<u8> {
    if los < 0.0 || los.is_nan() {
        return Err(Error::NegativeLos(los));
    }
    Ok(u8::from(los > threshold))
}

fn stay_los(stay: &IcuStay) -> Option<f64> {
    stay.los.or_else(|| match (stay.in_time, stay.out_time) {
        (Some(i), Some(o)) if o >= i => Some((o - i).num_seconds() as f64 / 86_400.0),
        _ => None,
    })
}

/// Applies the selection rules in order:
///
/// 1. drop admissions whose expire flag is 1;
/// 2. keep subjects with some remaining admission whose diagnosis contains
///    the keyword (case-insensitive) and with an admission linked to an ICU
///    stay;
/// 3. keep subjects with an ICD-9 code starting with a configured prefix;
/// 4. describe each subject by their latest admission (admit time, then
///    hadm_id) that has an ICU stay, and that admission's latest stay.
///
/// Output rows are sorted by subject_id.
pub fn extract_cohort(tables: &RawTables, cfg: &CohortConfig) -> Result<CohortTable> {
    cfg.validate()?;
    let keyword = cfg.diagnosis_keyword.to_lowercase();

    let alive: Vec<&Admission> = tables
        .admissions
        .iter()
        .filter(|a| a.expire_flag != Some(1))
        .filter(|a| a.subject_id.is_some())
        .collect();

    let mut stays_by_hadm: HashMap<Id, Vec<&IcuStay>> = HashMap::new();
    for s in &tables.icustays {
        if let (Some(h), Some(_)) = (s.hadm_id, s.icustay_id) {
            stays_by_hadm.entry(h).or_default().push(s);
        }
    }

    let mut by_subject: BTreeMap<Id, Vec<&Admission>> = BTreeMap::new();
    for a in &alive {
        by_subject
            .entry(a.subject_id.unwrap_or_default())
            .or_default()
            .push(a);
    }

    let icd_subjects: BTreeSet<Id> = tables
        .diagnoses_icd
        .iter()
        .filter(|d| icd9_matches(&d.icd9_code, &cfg.icd9_prefixes))
        .filter_map(|d| d.subject_id)
        .collect();

    let genders: HashMap<Id, &str> = tables
        .patients
        .iter()
        .filter_map(|p| p.subject_id.map(|id| (id, p.gender.as_str())))
        .collect();
    let dobs: HashMap<Id, NaiveDateTime> = tables
        .patients
        .iter()
        .filter_map(|p| Some((p.subject_id?, p.dob?)))
        .collect();

    let mut rows = Vec::new();
    for (&subject, admissions) in &by_subject {
        let has_keyword = admissions
            .iter()
            .any(|a| a.diagnosis.to_lowercase().contains(&keyword));
        if !has_keyword || !icd_subjects.contains(&subject) {
            continue;
        }
        let latest = admissions
            .iter()
            .filter(|a| a.hadm_id.is_some_and(|h| stays_by_hadm.contains_key(&h)))
            .max_by(|a, b| (a.admit_time, a.hadm_id).cmp(&(b.admit_time, b.hadm_id)));
        let Some(adm) = latest else {
            continue;
        };
        let hadm = adm.hadm_id.unwrap_or_default();
        let stay = stays_by_hadm[&hadm]
            .iter()
            .max_by(|a, b| (a.in_time, a.icustay_id).cmp(&(b.in_time, b.icustay_id)))
            .copied();
        let Some(stay) = stay else {
            continue;
        };
        let Some(los) = stay_los(stay) else {
            continue;
        };
        let age_years = match (dobs.get(&subject), adm.admit_time) {
            (Some(&dob), Some(at)) => Some(age_in_years(dob, at) as f64),
            _ => None,
        };
        let gender = genders
            .get(&subject)
            .map(|g| g.trim().to_uppercase())
            .filter(|g| !g.is_empty());
        rows.push(CohortRow {
            subject_id: subject,
            last_hadm_id: hadm,
            last_icustay_id: stay.icustay_id.unwrap_or_default(),
            los,
            gender,
            age_years,
            admission_type: adm.admission_type.trim().to_uppercase(),
        });
    }
    Ok(CohortTable { rows })
}

/// Builds the per-patient design matrix.
///
/// Column order: one binary column per medication key, `gender_male`,
/// `age_over_<cutoff>`, one-hot admission types (sorted), then one numeric
/// column per lab key holding the mean of that patient's matching chart
/// values. Keys match when the normalized key is a substring of the
/// normalized drug or item name.
pub fn build_dataset(
    cohort: &CohortTable,
    tables: &RawTables,
    cfg: &CohortConfig,
) -> Result<Dataset> {
    cfg.validate()?;
    if cohort.rows.is_empty() {
        return Err(Error::Dataset("cohort is empty".into()));
    }
    let med_keys: Vec<String> = cfg
        .medication_keys
        .iter()
        .map(|k| normalize_key(k))
        .collect();
    let lab_keys: Vec<String> = cfg.lab_keys.iter().map(|k| normalize_key(k)).collect();
    let mut seen = BTreeSet::new();
    for k in med_keys.iter().chain(&lab_keys) {
        if k.is_empty() {
            return Err(Error::Config("empty feature key".into()));
        }
        if !seen.insert(k.as_str()) {
            return Err(Error::Config(format!(
                "feature key `{k}` is configured more than once; disambiguate \
                 medication and lab keys"
            )));
        }
    }

    let subjects: BTreeSet<Id> = cohort.rows.iter().map(|r| r.subject_id).collect();
    let mut meds: HashMap<Id, Vec<bool>> = HashMap::new();
    for p in &tables.prescriptions {
        let Some(s) = p.subject_id.filter(|s| subjects.contains(s)) else {
            continue;
        };
        let drug = normalize_key(&p.drug);
        let flags = meds.entry(s).or_insert_with(|| vec![false; med_keys.len()]);
        for (f, k) in flags.iter_mut().zip(&med_keys) {
            *f |= drug.contains(k.as_str());
        }
    }
    let mut labs: HashMap<Id, Vec<(f64, usize)>> = HashMap::new();
    for e in &tables.chartevents {
        let (Some(s), Some(v)) = (e.subject_id.filter(|s| subjects.contains(s)), e.value_num)
        else {
            continue;
        };
        let item = normalize_key(&e.item_key);
        let acc = labs
            .entry(s)
            .or_insert_with(|| vec![(0.0, 0); lab_keys.len()]);
        for (a, k) in acc.iter_mut().zip(&lab_keys) {
            if item.contains(k.as_str()) {
                a.0 += v;
                a.1 += 1;
            }
        }
    }

    let admission_types: Vec<String> = cohort
        .rows
        .iter()
        .map(|r| r.admission_type.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let age_cut = cfg.age_cutoff_years;

    let mut columns = Vec::new();
    columns.extend(med_keys.iter().map(|k| Column::binary(format!("med:{k}"))));
    columns.push(Column::binary("gender_male"));
    columns.push(Column::binary(format!("age_over_{age_cut}")));
    columns.extend(
        admission_types
            .iter()
            .map(|t| Column::binary(format!("admission_type:{t}"))),
    );
    columns.extend(lab_keys.iter().map(|k| Column::numeric(format!("lab:{k}"))));

    let mut x = Vec::with_capacity(cohort.rows.len() * columns.len());
    let mut y = Vec::with_capacity(cohort.rows.len());
    for row in &cohort.rows {
        let s = row.subject_id;
        match meds.get(&s) {
            Some(flags) => x.extend(flags.iter().map(|&f| f64::from(u8::from(f)))),
            None => x.extend(std::iter::repeat_n(0.0, med_keys.len())),
        }
        x.push(match row.gender.as_deref() {
            Some(g) if g.starts_with('M') => 1.0,
            Some(_) => 0.0,
            None => MISSING,
        });
        x.push(match row.age_years {
            Some(a) => f64::from(u8::from(a > age_cut)),
            None => MISSING,
        });
        x.extend(
            admission_types
                .iter()
                .map(|t| f64::from(u8::from(*t == row.admission_type))),
        );
        match labs.get(&s) {
            Some(acc) => {
                x.extend(
                    acc.iter()
                        .map(|&(sum, n)| if n == 0 { MISSING } else { sum / n as f64 }),
                )
            }
            None => x.extend(std::iter::repeat_n(MISSING, lab_keys.len())),
        }
        y.push(label_los(row.los, cfg.los_threshold_days)?);
    }

    let mut ds = Dataset::new(columns, x, y)?;
    let long = ds.labels().iter().filter(|&&l| l == 1).count();
    ds.meta.insert("source".into(), "mimic-etl".into());
    ds.meta
        .insert("cohort_patients".into(), cohort.rows.len().to_string());
    ds.meta.insert("cohort_long_los".into(), long.to_string());
    ds.meta.insert(
        "los_threshold_days".into(),
        cfg.los_threshold_days.to_string(),
    );
    Ok(ds)
}

//! MIMIC-III-shaped cohort extraction.

mod cohort;
mod tables;

pub use cohort::{
    age_in_years, build_dataset, extract_cohort, label_los, normalize_key, CohortConfig, CohortRow,
    CohortTable,
};
pub use tables::{
    load_tables, parse_timestamp, Admission, ChartEvent, DiagnosisCode, IcuStay, Id, Patient,
    Prescription, RawTables, Schema, TableSchema,
};

//! CSV ingestion of MIMIC-III-shaped tables.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};

pub type Id = i64;

#[derive(Debug, Clone, PartialEq)]
pub struct Admission {
    pub subject_id: Option<Id>,
    pub hadm_id: Option<Id>,
    pub admit_time: Option<NaiveDateTime>,
    pub disch_time: Option<NaiveDateTime>,
    pub admission_type: String,
    pub diagnosis: String,
    pub expire_flag: Option<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcuStay {
    pub subject_id: Option<Id>,
    pub hadm_id: Option<Id>,
    pub icustay_id: Option<Id>,
    pub in_time: Option<NaiveDateTime>,
    pub out_time: Option<NaiveDateTime>,
    /// Days, fractional.
    pub los: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosisCode {
    pub subject_id: Option<Id>,
    pub hadm_id: Option<Id>,
    pub icd9_code: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prescription {
    pub subject_id: Option<Id>,
    pub hadm_id: Option<Id>,
    pub icustay_id: Option<Id>,
    pub drug: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartEvent {
    pub subject_id: Option<Id>,
    pub hadm_id: Option<Id>,
    pub icustay_id: Option<Id>,
    pub item_key: String,
    pub value_num: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patient {
    pub subject_id: Option<Id>,
    pub dob: Option<NaiveDateTime>,
    pub gender: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTables {
    pub admissions: Vec<Admission>,
    pub icustays: Vec<IcuStay>,
    pub diagnoses_icd: Vec<DiagnosisCode>,
    pub prescriptions: Vec<Prescription>,
    pub chartevents: Vec<ChartEvent>,
    pub patients: Vec<Patient>,
}

/// File name and logical-field to CSV-column mapping for one table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSchema {
    pub name: &'static str,
    pub file: String,
    pub columns: BTreeMap<&'static str, String>,
}

impl TableSchema {
    fn new(name: &'static str, fields: &[(&'static str, &str)]) -> Self {
        TableSchema {
            name,
            file: format!("{name}.csv"),
            columns: fields.iter().map(|(f, c)| (*f, (*c).to_owned())).collect(),
        }
    }
}

/// Table-name to column-name map; defaults follow MIMIC-III v1.4.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub admissions: TableSchema,
    pub icustays: TableSchema,
    pub diagnoses_icd: TableSchema,
    pub prescriptions: TableSchema,
    pub chartevents: TableSchema,
    pub patients: TableSchema,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            admissions: TableSchema::new(
                "ADMISSIONS",
                &[
                    ("subject_id", "SUBJECT_ID"),
                    ("hadm_id", "HADM_ID"),
                    ("admit_time", "ADMITTIME"),
                    ("disch_time", "DISCHTIME"),
                    ("admission_type", "ADMISSION_TYPE"),
                    ("diagnosis", "DIAGNOSIS"),
                    ("expire_flag", "HOSPITAL_EXPIRE_FLAG"),
                ],
            ),
            icustays: TableSchema::new(
                "ICUSTAYS",
                &[
                    ("subject_id", "SUBJECT_ID"),
                    ("hadm_id", "HADM_ID"),
                    ("icustay_id", "ICUSTAY_ID"),
                    ("in_time", "INTIME"),
                    ("out_time", "OUTTIME"),
                    ("los", "LOS"),
                ],
            ),
            diagnoses_icd: TableSchema::new(
                "DIAGNOSES_ICD",
                &[
                    ("subject_id", "SUBJECT_ID"),
                    ("hadm_id", "HADM_ID"),
                    ("icd9_code", "ICD9_CODE"),
                ],
            ),
            prescriptions: TableSchema::new(
                "PRESCRIPTIONS",
                &[
                    ("subject_id", "SUBJECT_ID"),
                    ("hadm_id", "HADM_ID"),
                    ("icustay_id", "ICUSTAY_ID"),
                    ("drug", "DRUG"),
                ],
            ),
            chartevents: TableSchema::new(
                "CHARTEVENTS",
                &[
                    ("subject_id", "SUBJECT_ID"),
                    ("hadm_id", "HADM_ID"),
                    ("icustay_id", "ICUSTAY_ID"),
                    ("item_key", "ITEMID"),
                    ("value_num", "VALUENUM"),
                ],
            ),
            patients: TableSchema::new(
                "PATIENTS",
                &[
                    ("subject_id", "SUBJECT_ID"),
                    ("dob", "DOB"),
                    ("gender", "GENDER"),
                ],
            ),
        }
    }
}

impl Schema {
    pub fn tables_mut(&mut self) -> [&mut TableSchema; 6] {
        [
            &mut self.admissions,
            &mut self.icustays,
            &mut self.diagnoses_icd,
            &mut self.prescriptions,
            &mut self.chartevents,
            &mut self.patients,
        ]
    }

    /// Applies `schema.<TABLE>.file = ...` or `schema.<TABLE>.<field> = ...`
    /// (the `schema.` prefix already stripped). Table names are
    /// case-insensitive.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (table, field) = key
            .split_once('.')
            .ok_or_else(|| Error::Config(format!("schema key `{key}` needs TABLE.field")))?;
        let t = self
            .tables_mut()
            .into_iter()
            .find(|t| t.name.eq_ignore_ascii_case(table))
            .ok_or_else(|| Error::Config(format!("unknown table `{table}`")))?;
        if field == "file" {
            t.file = value.to_owned();
            return Ok(());
        }
        let slot = t
            .columns
            .iter_mut()
            .find(|(f, _)| f.eq_ignore_ascii_case(field))
            .ok_or_else(|| Error::Config(format!("unknown field `{field}` for {}", t.name)))?;
        *slot.1 = value.to_owned();
        Ok(())
    }
}

/// Record access by logical field name.
struct Table {
    index: BTreeMap<&'static str, usize>,
    records: Vec<csv::StringRecord>,
}

impl Table {
    fn read(dir: &Path, schema: &TableSchema) -> Result<Table> {
        let path = dir.join(&schema.file);
        if !path.is_file() {
            return Err(Error::MissingTable {
                table: schema.name.to_owned(),
                path,
            });
        }
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(file);
        let headers = rdr.headers()?.clone();
        let mut index = BTreeMap::new();
        for (field, column) in &schema.columns {
            let pos = headers
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(column))
                .ok_or_else(|| Error::MissingColumn {
                    table: schema.name.to_owned(),
                    column: column.clone(),
                })?;
            index.insert(*field, pos);
        }
        let records = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Table { index, records })
    }

    fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        self.records.iter().map(move |r| Row {
            table: self,
            rec: r,
        })
    }
}

struct Row<'a> {
    table: &'a Table,
    rec: &'a csv::StringRecord,
}

impl Row<'_> {
    fn text(&self, field: &str) -> &str {
        let i = self.table.index[field];
        self.rec.get(i).unwrap_or("").trim()
    }

    fn string(&self, field: &str) -> String {
        self.text(field).to_owned()
    }

    fn id(&self, field: &str) -> Option<Id> {
        let t = self.text(field);
        t.parse::<Id>().ok().or_else(|| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.fract() == 0.0)
                .map(|v| v as Id)
        })
    }

    fn real(&self, field: &str) -> Option<f64> {
        self.text(field)
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
    }

    fn time(&self, field: &str) -> Option<NaiveDateTime> {
        parse_timestamp(self.text(field))
    }
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    const FORMATS: [&str; 3] = ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })
}

/// Loads all six tables from `dir`. Unparseable numeric or timestamp cells
/// become `None`; row order is preserved.
pub fn load_tables(dir: &Path, schema: &Schema) -> Result<RawTables> {
    let adm = Table::read(dir, &schema.admissions)?;
    let icu = Table::read(dir, &schema.icustays)?;
    let dx = Table::read(dir, &schema.diagnoses_icd)?;
    let rx = Table::read(dir, &schema.prescriptions)?;
    let chart = Table::read(dir, &schema.chartevents)?;
    let pat = Table::read(dir, &schema.patients)?;

    Ok(RawTables {
        admissions: adm
            .rows()
            .map(|r| Admission {
                subject_id: r.id("subject_id"),
                hadm_id: r.id("hadm_id"),
                admit_time: r.time("admit_time"),
                disch_time: r.time("disch_time"),
                admission_type: r.string("admission_type"),
                diagnosis: r.string("diagnosis"),
                expire_flag: r.id("expire_flag").and_then(|f| match f {
                    0 | 1 => Some(f as u8),
                    _ => None,
                }),
            })
            .collect(),
        icustays: icu
            .rows()
            .map(|r| IcuStay {
                subject_id: r.id("subject_id"),
                hadm_id: r.id("hadm_id"),
                icustay_id: r.id("icustay_id"),
                in_time: r.time("in_time"),
                out_time: r.time("out_time"),
                los: r.real("los").filter(|v| *v >= 0.0),
            })
            .collect(),
        diagnoses_icd: dx
            .rows()
            .map(|r| DiagnosisCode {
                subject_id: r.id("subject_id"),
                hadm_id: r.id("hadm_id"),
                icd9_code: r.string("icd9_code"),
            })
            .collect(),
        prescriptions: rx
            .rows()
            .map(|r| Prescription {
                subject_id: r.id("subject_id"),
                hadm_id: r.id("hadm_id"),
                icustay_id: r.id("icustay_id"),
                drug: r.string("drug"),
            })
            .collect(),
        chartevents: chart
            .rows()
            .map(|r| ChartEvent {
                subject_id: r.id("subject_id"),
                hadm_id: r.id("hadm_id"),
                icustay_id: r.id("icustay_id"),
                item_key: r.string("item_key"),
                value_num: r.real("value_num"),
            })
            .collect(),
        patients: pat
            .rows()
            .map(|r| Patient {
                subject_id: r.id("subject_id"),
                dob: r.time("dob"),
                gender: r.string("gender"),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_headers(dir: &Path, schema: &Schema) {
        let mut s = schema.clone();
        for t in s.tables_mut() {
            let header: Vec<&str> = t.columns.values().map(String::as_str).collect();
            fs::write(dir.join(&t.file), header.join(",") + "\n").unwrap();
        }
    }

    #[test]
    fn header_only_tables_load_empty() {
        let dir = tempfile::tempdir().unwrap();
        let schema = Schema::default();
        write_headers(dir.path(), &schema);
        let t = load_tables(dir.path(), &schema).unwrap();
        assert_eq!(t, RawTables::default());
    }

    #[test]
    fn admissions_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let schema = Schema::default();
        write_headers(dir.path(), &schema);
        fs::write(
            dir.path().join("ADMISSIONS.csv"),
            "ROW_ID,SUBJECT_ID,HADM_ID,ADMITTIME,DISCHTIME,ADMISSION_TYPE,DIAGNOSIS,HOSPITAL_EXPIRE_FLAG\n\
             1,10,100,2150-01-01 08:00:00,2150-01-09 10:30:00,EMERGENCY,\"LUNG CANCER;PNEUMONIA\",0\n\
             2,11,,2150-02-01 00:00:00,,ELECTIVE,COLON CANCER,1\n\
             3,12,120,not-a-date,2151-01-01,URGENT,SEPSIS,x\n",
        )
        .unwrap();
        let t = load_tables(dir.path(), &schema).unwrap();
        assert_eq!(t.admissions.len(), 3);
        let a = &t.admissions[0];
        assert_eq!(
            (a.subject_id, a.hadm_id, a.expire_flag),
            (Some(10), Some(100), Some(0))
        );
        assert_eq!(a.diagnosis, "LUNG CANCER;PNEUMONIA");
        assert_eq!(a.admit_time, parse_timestamp("2150-01-01 08:00:00"));
        assert_eq!(t.admissions[1].hadm_id, None);
        assert_eq!(t.admissions[1].expire_flag, Some(1));
        assert_eq!(t.admissions[2].admit_time, None);
        assert_eq!(t.admissions[2].expire_flag, None);
        assert!(t.admissions[2].disch_time.is_some());
    }

    #[test]
    fn missing_column_names_table_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let schema = Schema::default();
        write_headers(dir.path(), &schema);
        fs::write(
            dir.path().join("ADMISSIONS.csv"),
            "SUBJECT_ID,HADM_ID,ADMITTIME,DISCHTIME,ADMISSION_TYPE,DIAGNOSIS\n",
        )
        .unwrap();
        let err = load_tables(dir.path(), &schema).unwrap_err();
        assert_eq!(
            err.to_string(),
            "ADMISSIONS: column HOSPITAL_EXPIRE_FLAG not found"
        );
    }

    #[test]
    fn missing_file_names_table() {
        let dir = tempfile::tempdir().unwrap();
        let schema = Schema::default();
        write_headers(dir.path(), &schema);
        fs::remove_file(dir.path().join("PATIENTS.csv")).unwrap();
        match load_tables(dir.path(), &schema) {
            Err(Error::MissingTable { table, .. }) => assert_eq!(table, "PATIENTS"),
            other => panic!("expected MissingTable, got {other:?}"),
        }
    }

    #[test]
    fn schema_overrides() {
        let mut s = Schema::default();
        s.set("admissions.expire_flag", "EXPIRE_FLAG").unwrap();
        s.set("CHARTEVENTS.file", "chart_small.csv").unwrap();
        assert_eq!(s.admissions.columns["expire_flag"], "EXPIRE_FLAG");
        assert_eq!(s.chartevents.file, "chart_small.csv");
        assert!(s.set("nope.file", "x").is_err());
        assert!(s.set("patients.height", "x").is_err());
    }
}

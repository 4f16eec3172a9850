use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{table}: file {path} not found")]
    MissingTable { table: String, path: PathBuf },

    #[error("{table}: column {column} not found")]
    MissingColumn { table: String, column: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("column {0} has no observed values among the fitting rows")]
    EmptyColumn(String),

    #[error("column schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("missing value at row {row}, column {column}; impute first")]
    MissingValue { row: usize, column: String },

    #[error("input contains a single class; both classes are required")]
    SingleClass,

    #[error("AUROC undefined: scores contain a single class")]
    UndefinedAuroc,

    #[error("length mismatch: {0} scores vs {1} labels")]
    LengthMismatch(usize, usize),

    #[error("weights are not normalized (sum = {0})")]
    UnnormalizedWeights(f64),

    #[error("negative length of stay: {0}")]
    NegativeLos(f64),

    #[error("cannot summarize an empty sequence")]
    EmptySummary,

    #[error("cannot render an empty report list")]
    EmptyReport,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // ingestion
    #[error("{path}: required column `{column}` is missing")]
    MissingColumn { path: String, column: String },
    #[error("{path}: row {row}: expected {expected} fields, found {found}")]
    MalformedRow {
        path: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: row {row}: label `{value}` is not 0 or 1")]
    BadLabel {
        path: String,
        row: usize,
        value: String,
    },
    #[error("{path}: row {row}: id `{value}` is not a non-negative integer")]
    BadId {
        path: String,
        row: usize,
        value: String,
    },
    #[error("{path}: id {id} appears more than once")]
    DuplicateRowId { path: String, id: u64 },
    #[error("degenerate split: {n} labeled rows with test fraction {test_fraction} leaves an empty side")]
    DegenerateSplit { n: usize, test_fraction: f64 },

    // text resources
    #[error("stopword file not found: {0}")]
    StopwordFileMissing(PathBuf),
    #[error("lemma file not found: {0}")]
    LemmaFileMissing(PathBuf),
    #[error("invalid pipeline config: {0}")]
    BadPipeline(String),

    // vectorization
    #[error("vocabulary is empty (no term reaches the document-frequency threshold)")]
    EmptyVocabulary,
    #[error("{path}: bad header: {reason}")]
    BadHeader { path: String, reason: String },
    #[error("{path}: line {line}: expected {expected} values, found {found}")]
    DimMismatchAt {
        path: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: line {line}: non-finite value")]
    NonFiniteValue { path: String, line: usize },
    #[error("document embedding missing for review id {0}")]
    MissingId(u64),
    #[error("document embedding file has duplicate id {0}")]
    DuplicateId(u64),

    // models
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("k = {k} is invalid for {n} training rows")]
    BadK { k: usize, n: usize },
    #[error("SVM training data contains a single class")]
    SingleClassTraining,
    #[error("multinomial naive Bayes requires non-negative features (row {row}, column {col})")]
    NegativeFeatureForMultinomial { row: usize, col: usize },
    #[error("labels must be 0 or 1 (found {0})")]
    BadTrainingLabel(u8),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("ensemble needs at least 2 members, got {0}")]
    BadEnsemble(usize),
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("incompatible configuration: {0}")]
    Incompatible(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),

    // persistence
    #[error("bundle format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt bundle: {0}")]
    CorruptBundle(String),
    #[error("{path}: {source}")]
    PathError {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An internal consistency check failed; indicates a bug rather than bad input.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn path(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::PathError {
            path: path.into(),
            source,
        }
    }

    /// True for failures that indicate a bug in this crate rather than in its inputs.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

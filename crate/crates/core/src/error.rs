use std::path::PathBuf;

use thiserror::Error;

use crate::model::MetricId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("{0} is a test-quality metric and cannot be used as a feature")]
    ForbiddenFeature(MetricId),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{file}:{line}:{column}: {message}")]
    Parse {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("class `{0}` is declared more than once")]
    DuplicateClass(String),
    #[error("cyclic inheritance involving {}", .0.join(" -> "))]
    CyclicHierarchy(Vec<String>),
    #[error("no classes found")]
    NoClasses,

    #[error("malformed class file: {0}")]
    MalformedClassFile(String),
    #[error("unsupported class file major version {found} (ceiling {ceiling})")]
    UnsupportedMajorVersion { found: u16, ceiling: u16 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: bad cell `{content}`")]
    BadCell {
        row: usize,
        column: String,
        content: String,
    },
    #[error("row {row}: duplicate record ({class_id}, {test_id})")]
    DuplicateRecord {
        row: usize,
        class_id: String,
        test_id: String,
    },
    #[error("row {row} ({class_id}): {violations}")]
    InvalidRecord {
        row: usize,
        class_id: String,
        violations: String,
    },
    #[error("csv: {0}")]
    Csv(String),

    #[error("need at least {needed} values, found {found}")]
    TooFewValues { needed: usize, found: usize },
    #[error("degenerate split: first quartile {q1} equals third quartile {q3}")]
    DegenerateSplit { q1: f64, q3: f64 },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("record {class_id} lacks feature {metric}")]
    MissingFeature { class_id: String, metric: MetricId },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("training data contains a single class")]
    SingleClassInput,
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("class {class} has {count} rows, fewer than k = {k}")]
    TooFewPerClass { class: String, count: usize, k: usize },
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("model: {0}")]
    Model(String),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

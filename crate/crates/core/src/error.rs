use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Data,
    Numerical,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Config => 2,
            Category::Data => 3,
            Category::Numerical => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Config => "config",
            Category::Data => "data",
            Category::Numerical => "numerical",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("no valid rows in {0}")]
    NoValidRows(String),
    #[error("duplicate date {date} with conflicting prices in {ticker}")]
    ConflictingDuplicate { ticker: String, date: String },
    #[error("empty intersection of calendars")]
    EmptyIntersection,
    #[error("non-positive price {value} at row {row} of column {column} under log transform")]
    NonPositivePrice { column: String, row: usize, value: f64 },
    #[error("break date {0} is outside the panel range")]
    BreakOutOfRange(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("singular regressor matrix: {0}")]
    Singular(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::BreakOutOfRange(_) => {
                Category::Config
            }
            Error::Io { .. }
            | Error::Csv { .. }
            | Error::NoValidRows(_)
            | Error::ConflictingDuplicate { .. }
            | Error::EmptyIntersection
            | Error::NonPositivePrice { .. }
            | Error::InsufficientData(_)
            | Error::Parse(_) => Category::Data,
            Error::Degenerate(_) | Error::Singular(_) | Error::Numerical(_) => {
                Category::Numerical
            }
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

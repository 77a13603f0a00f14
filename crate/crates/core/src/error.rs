use chrono::NaiveDate;
use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto exit codes via
/// [`Error::class`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("row {row}: cannot parse {what} `{value}`")]
    Parse {
        row: u64,
        what: &'static str,
        value: String,
    },
    #[error("row {row}: value {value} must be positive")]
    NonPositive { row: u64, value: f64 },
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("dates must be strictly increasing (at {0})")]
    Unordered(NaiveDate),
    #[error("no usable rows in input")]
    EmptyInput,
    #[error("the inputs have no dates or quarters in common")]
    EmptyIntersection,
    #[error("invalid window: t_start {t_start} must precede t_last {t_last}")]
    InvalidWindow { t_start: NaiveDate, t_last: NaiveDate },
    #[error("insufficient data: {found} points, at least {required} required")]
    InsufficientData { found: usize, required: usize },
    #[error("t = {t} is not before the critical time tc = {tc}")]
    Domain { t: f64, tc: f64 },
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    #[error("no candidate: every grid point gave a degenerate design")]
    NoCandidate,
    #[error("scan failed: no window could be fitted")]
    ScanFailed,
    #[error("significance undefined: {0}")]
    SignificanceUndefined(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Failure class, used for the CLI exit-code contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input files, flags or configuration.
    Input,
    /// The method ran but produced nothing usable.
    Method,
    /// A statistical test could not be evaluated.
    Undefined,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NoCandidate | Error::ScanFailed | Error::DegenerateDesign(_) => {
                ErrorClass::Method
            }
            Error::SignificanceUndefined(_) => ErrorClass::Undefined,
            _ => ErrorClass::Input,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

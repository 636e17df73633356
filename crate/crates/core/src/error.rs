use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {what} = {value} is outside {expected}")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid center value m = {0}: the center must satisfy 0 <= m < 1")]
    InvalidCenter(f64),

    #[error("step size underflow at r = {r:e} (h = {h:e}); dynamics are near-singular")]
    StepSizeUnderflow { r: f64, h: f64 },

    #[error("step budget of {0} exhausted before reaching a termination event")]
    StepBudgetExhausted(usize),

    #[error("radius {r} is outside the profile range [{lo}, {hi}]")]
    OutOfRange { r: f64, lo: f64, hi: f64 },

    #[error("free shooting from m = {m} ended with {status} instead of a zero crossing")]
    NoZeroCrossing { m: f64, status: &'static str },

    #[error("no center value in the grid produced a unit-ball solution")]
    EmptyDiagram,

    #[error("lambda = {lambda} is not bracketed by the branch lambda(m) on (0, {m_upper}]")]
    NotBracketed { lambda: f64, m_upper: f64 },

    #[error("eigenvalue bracket exhausted: |mu| reached the limit {limit:e} without a sign change")]
    BracketExhausted { limit: f64 },

    #[error("dimension n = {n} outside the range {lo}..={hi} required by {check}")]
    DimensionOutOfRange {
        check: &'static str,
        n: usize,
        lo: usize,
        hi: usize,
    },

    #[error("{check} is not applicable: {reason}")]
    NotApplicable { check: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable, module-level name of the error, used by the CLI when surfacing
    /// computation failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "DomainError",
            Error::InvalidCenter(_) => "InvalidCenter",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::StepBudgetExhausted(_) => "StepBudgetExhausted",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::NoZeroCrossing { .. } => "NoZeroCrossing",
            Error::EmptyDiagram => "EmptyDiagram",
            Error::NotBracketed { .. } => "NotBracketed",
            Error::BracketExhausted { .. } => "BracketExhausted",
            Error::DimensionOutOfRange { .. } => "DimensionOutOfRange",
            Error::NotApplicable { .. } => "NotApplicable",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::Parse(_) => "ParseError",
            Error::Usage(_) => "UsageError",
            Error::Io(_) => "IoError",
            Error::Json(_) => "JsonError",
            Error::Csv(_) => "CsvError",
        }
    }
}

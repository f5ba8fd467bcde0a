use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series needs at least 2 records, got {0}")]
    EmptySeries(usize),

    #[error("count violation at t={t}: {detail}")]
    CountViolation { t: i64, detail: String },

    #[error("duplicate period t={0}")]
    DuplicatePeriod(i64),

    #[error("period length must be positive, got {0}")]
    NonPositivePeriod(f64),

    #[error("parse error at row {row}: {message}")]
    ParseError { row: u64, message: String },

    #[error("unknown dataset '{0}' (expected alpha, delta or omicron)")]
    UnknownDataset(String),

    #[error("log-odds undefined at boundary proportion {0}")]
    BoundaryOdds(f64),

    #[error("maximum likelihood estimate does not exist: {0}")]
    Separation(String),

    #[error("singular information matrix: {0}")]
    Singular(String),

    #[error("no convergence after {iterations} iterations (score norm {score_norm:e})")]
    MaxIterations { iterations: usize, score_norm: f64 },

    #[error("bandwidth K={bandwidth} must be smaller than the number of periods T={periods}")]
    BandwidthTooLarge { bandwidth: usize, periods: usize },

    #[error("cannot compose advantages with periods {0} and {1} days")]
    PeriodMismatch(f64, f64),

    #[error("band multiplier c must be non-negative, got {0}")]
    NegativeC(f64),

    #[error("reproduction number must be positive, got {0}")]
    NonPositiveR(f64),

    #[error("counts must be positive: {0}")]
    NonPositiveCount(String),

    #[error("invalid variant index: {0}")]
    InvalidIndex(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("training window out of range: {0}")]
    WindowOutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable kebab-case tag used as the diagnostic prefix by the command-line tool.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySeries(_) => "empty-series",
            Error::CountViolation { .. } => "count-violation",
            Error::DuplicatePeriod(_) => "duplicate-period",
            Error::NonPositivePeriod(_) => "non-positive-period",
            Error::ParseError { .. } => "parse-error",
            Error::UnknownDataset(_) => "unknown-dataset",
            Error::BoundaryOdds(_) => "boundary-odds",
            Error::Separation(_) => "separation",
            Error::Singular(_) => "singular",
            Error::MaxIterations { .. } => "max-iterations",
            Error::BandwidthTooLarge { .. } => "bandwidth-too-large",
            Error::PeriodMismatch(..) => "period-mismatch",
            Error::NegativeC(_) => "negative-c",
            Error::NonPositiveR(_) => "non-positive-r",
            Error::NonPositiveCount(_) => "non-positive-count",
            Error::InvalidIndex(_) => "invalid-index",
            Error::InvalidConfig(_) => "invalid-config",
            Error::WindowOutOfRange(_) => "window-out-of-range",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // Input and schema problems.
    #[error("missing column: {0}")]
    MissingColumn(String),
    #[error("unparseable value {value:?} at row {row}, column {column}")]
    UnparseableValue { row: usize, column: String, value: String },
    #[error("duplicate date: {0}")]
    DuplicateDate(NaiveDate),
    #[error("unknown variable: {0}")]
    UnknownVariable(String),
    #[error("column {column} has {got} entries, expected {expected}")]
    LengthMismatch { column: String, expected: usize, got: usize },
    #[error("dates are not strictly increasing at index {0}")]
    UnorderedDates(usize),
    #[error("column {column} has a missing value at {date}")]
    MissingValue { column: String, date: NaiveDate },
    #[error("series has a leading or trailing gap")]
    LeadingOrTrailingGap,
    #[error("series too short: need more than {needed} values, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("degenerate range: source series is constant")]
    DegenerateRange,
    #[error("csv error: {0}")]
    Csv(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("json error: {0}")]
    Json(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    // Category structure.
    #[error("incompatible endpoints: target {target} does not match source {source_id}")]
    IncompatibleEndpoints { target: String, source_id: String },
    #[error("division by zero{}", .0.map(|d| format!(" at {d}")).unwrap_or_default())]
    DivisionByZero(Option<NaiveDate>),
    #[error("functor does not map object {0}")]
    UnmappedObject(String),
    #[error("functor does not map morphism {0}")]
    UnmappedMorphism(String),
    #[error("unknown edge: {0}")]
    UnknownEdge(String),

    // Numerics.
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("insufficient rows: need at least {needed}, got {got}")]
    InsufficientRows { needed: usize, got: usize },
    #[error("insufficient observations: need more than {needed}, got {got}")]
    InsufficientObservations { needed: usize, got: usize },
    #[error("moment matrix is singular")]
    SingularMomentMatrix,
    #[error("residual covariance is not positive definite")]
    NonPositiveDefiniteSigma,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no critical values tabulated for {0} stochastic trends")]
    CriticalValuesUnavailable(usize),
    #[error("objective is not finite at {0}")]
    NonFiniteObjective(f64),
    #[error("constant column: {0}")]
    ConstantColumn(String),
    #[error("every dynamic weight is zero or undefined")]
    AllZeroWeights,
    #[error("result is empty")]
    EmptyResult,
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient
                | Error::SingularMomentMatrix
                | Error::NonPositiveDefiniteSigma
                | Error::NonFiniteObjective(_)
                | Error::AllZeroWeights
                | Error::DegenerateRange
                | Error::DivisionByZero(_)
        )
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

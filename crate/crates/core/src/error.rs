use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid group table: {0}")]
    InvalidTable(String),
    #[error("group too large: {0}")]
    SizeLimit(String),
    #[error("malformed group descriptor `{0}`")]
    BadDescriptor(String),
    #[error("operation requires an abelian group")]
    NonAbelianGroup,
    #[error("subset U must be nonempty")]
    EmptySubset,
    #[error("element index {0} out of range")]
    BadElement(usize),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("elements live over different spaces")]
    SpaceMismatch,
    #[error("fiber dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("action is not free: t_{g} fixes point {x}")]
    NotFreeAction { g: usize, x: usize },
    #[error("realization entry ({row}, {col}) = {magnitude:e} lies outside the orbit pattern")]
    PatternViolation {
        row: usize,
        col: usize,
        magnitude: f64,
    },
    #[error("exponent {0} not supported here (need 1, 2 or inf)")]
    UnsupportedExponent(String),
    #[error("invalid exponent `{0}`")]
    BadExponent(String),
    #[error("no free action of a group of order {order} on {points} points")]
    InfeasibleFreeAction { order: usize, points: usize },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

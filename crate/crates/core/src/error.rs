use thiserror::Error;

/// Errors produced by the integrators, tables and harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite {kind} rate at ({i}, {j}): {value}")]
    NonFiniteRate {
        kind: RateKind,
        i: usize,
        j: usize,
        value: f64,
    },

    #[error("negative {kind} rate at ({i}, {j}): {value}")]
    NegativeRate {
        kind: RateKind,
        i: usize,
        j: usize,
        value: f64,
    },

    #[error("state component {index} is not strictly positive: {value:e}")]
    NonPositiveState { index: usize, value: f64 },

    #[error("state component {index} is not finite: {value}")]
    NonFiniteState { index: usize, value: f64 },

    #[error("singular matrix: no usable pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("matrix is not strictly column diagonally dominant (column {column})")]
    NotDiagonallyDominant { column: usize },

    #[error("number of subintervals {0} outside supported range 1..=15")]
    UnsupportedSubintervals(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid step schedule: {0}")]
    InvalidSchedule(String),

    #[error("trajectories are not aligned: {0}")]
    MisalignedTrajectories(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("csv parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures that originate in the numerics rather than in
    /// malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteRate { .. }
                | Error::NegativeRate { .. }
                | Error::NonPositiveState { .. }
                | Error::NonFiniteState { .. }
                | Error::SingularMatrix { .. }
                | Error::NotDiagonallyDominant { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    Production,
    Destruction,
}

impl std::fmt::Display for RateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateKind::Production => f.write_str("production"),
            RateKind::Destruction => f.write_str("destruction"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

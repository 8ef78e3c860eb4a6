use thiserror::Error;

/// Which coefficient sequence ran out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sequence {
    OffDiagonal,
    Diagonal,
}

impl std::fmt::Display for Sequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sequence::OffDiagonal => f.write_str("a"),
            Sequence::Diagonal => f.write_str("b"),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("coefficient underrun: {sequence}_{index} requested but only {available} entries are available")]
    CoefficientUnderrun {
        sequence: Sequence,
        index: usize,
        available: usize,
    },

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("insufficient {what}: need {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("not a response vector: connecting matrix loses positivity at index {index}")]
    NotAResponseVector { index: usize },

    #[error("not a moment sequence of a positive measure: Hankel matrix loses positivity at index {index}")]
    NotAMomentSequence { index: usize },

    #[error("ill-conditioned factorization at index {index}: relative pivot {ratio:e} below {threshold:e}; retry with extended or rational precision")]
    IllConditioned {
        index: usize,
        ratio: f64,
        threshold: f64,
    },

    #[error("tridiagonal eigensolver failed to converge for eigenvalue {index}")]
    EigenSolverFailure { index: usize },

    #[error("not limit circle: {0}")]
    NotLimitCircle(String),

    #[error("series not converging after {order} terms: likely limit point")]
    SeriesNotConverging { order: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::CoefficientUnderrun { .. } => "coefficient_underrun",
            Error::InvalidCoefficients(_) => "invalid_coefficients",
            Error::InsufficientData { .. } => "insufficient_data",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::NotAResponseVector { .. } => "not_a_response_vector",
            Error::NotAMomentSequence { .. } => "not_a_moment_sequence",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::EigenSolverFailure { .. } => "eigen_solver_failure",
            Error::NotLimitCircle(_) => "not_limit_circle",
            Error::SeriesNotConverging { .. } => "series_not_converging",
        }
    }

    /// `true` when the input is at fault rather than the computation.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::EigenSolverFailure { .. })
    }
}

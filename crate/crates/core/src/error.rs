use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("operator is not self-adjoint (max |A - A^dag| = {deviation:e})")]
    NotSelfAdjoint { deviation: f64 },
    #[error("operator is not a projector (max |P - P^2| = {deviation:e})")]
    NotProjector { deviation: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("bad factorization: {0}")]
    BadFactorization(String),
    #[error("collapse onto a branch with probability {probability:e}")]
    ZeroProbabilityBranch { probability: f64 },
    #[error("|<post|pre>| = {overlap:e} is below the threshold {threshold:e}; weak value undefined")]
    OverlapTooSmall { overlap: f64, threshold: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("post-selection probability {probability:e} is effectively zero")]
    ZeroPostSelectionProbability { probability: f64 },
    #[error("target component {index} has no pendulum within tolerance")]
    TargetUnmatched { index: usize },
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Stable machine-readable code, used in structured error output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::NotNormalized { .. } => "NOT_NORMALIZED",
            Error::NotSelfAdjoint { .. } => "NOT_SELF_ADJOINT",
            Error::NotProjector { .. } => "NOT_PROJECTOR",
            Error::InvalidDensityMatrix(_) => "INVALID_DENSITY_MATRIX",
            Error::BadFactorization(_) => "BAD_FACTORIZATION",
            Error::ZeroProbabilityBranch { .. } => "ZERO_PROBABILITY_BRANCH",
            Error::OverlapTooSmall { .. } => "OVERLAP_TOO_SMALL",
            Error::GridTooCoarse(_) => "GRID_TOO_COARSE",
            Error::GridTooSmall(_) => "GRID_TOO_SMALL",
            Error::InvalidGrid(_) => "INVALID_GRID",
            Error::ZeroPostSelectionProbability { .. } => "ZERO_POSTSELECTION_PROBABILITY",
            Error::TargetUnmatched { .. } => "TARGET_UNMATCHED",
            Error::DegenerateSample(_) => "DEGENERATE_SAMPLE",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
        }
    }
}

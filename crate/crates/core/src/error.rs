use thiserror::Error;

/// Errors produced by the measurement toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {row} has {cols} entries")]
    NotSquare {
        rows: usize,
        row: usize,
        cols: usize,
    },
    #[error("matrix dimension must be positive")]
    EmptyMatrix,
    #[error("declared dim {declared} does not match {found} rows")]
    DeclaredDim { declared: usize, found: usize },
    #[error("matrix contains a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },
    #[error("matrix is singular (smallest eigenvalue {eigenvalue:e})")]
    Singular { eigenvalue: f64 },
    #[error("Jacobi sweeps did not converge (off-diagonal mass {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("spectrum out of [0, 1]: eigenvalue {eigenvalue}")]
    SpectrumOutOfRange { eigenvalue: f64 },
    #[error("entry {index} is not a valid effect: {source}")]
    InvalidEffect {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("sum of effects exceeds the identity (largest eigenvalue {max_eigenvalue})")]
    SumExceedsIdentity { max_eigenvalue: f64 },
    #[error("effects do not sum to the identity (deviation {deviation:e})")]
    NotNormalized { deviation: f64 },
    #[error("a POM needs at least one outcome")]
    EmptyPom,
    #[error("{outcomes} outcome labels for {effects} effects")]
    LabelCount { outcomes: usize, effects: usize },
    #[error("duplicate outcome label {0}")]
    DuplicateOutcome(String),
    #[error("unknown outcome {0}")]
    UnknownOutcome(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("vector is not normalized (norm {norm})")]
    NonUnitVector { norm: f64 },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid lattice model: {0}")]
    InvalidModel(String),
    #[error("invalid spatial sets: {0}")]
    InvalidSets(String),
    #[error("geometry violation: {0}")]
    Geometry(String),
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("malformed phase-space outcome grid: {0}")]
    MalformedGrid(String),
    #[error("JSON: {0}")]
    Json(String),
}

impl Error {
    /// Variant name, stable across message wording changes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::EmptyMatrix => "EmptyMatrix",
            Error::DeclaredDim { .. } => "DeclaredDim",
            Error::NonFinite(..) => "NonFinite",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotPsd { .. } => "NotPsd",
            Error::Singular { .. } => "Singular",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SpectrumOutOfRange { .. } => "SpectrumOutOfRange",
            Error::InvalidEffect { .. } => "InvalidEffect",
            Error::SumExceedsIdentity { .. } => "SumExceedsIdentity",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::EmptyPom => "EmptyPom",
            Error::LabelCount { .. } => "LabelCount",
            Error::DuplicateOutcome(..) => "DuplicateOutcome",
            Error::UnknownOutcome(..) => "UnknownOutcome",
            Error::InvalidPartition(..) => "InvalidPartition",
            Error::InvalidState(..) => "InvalidState",
            Error::NonUnitVector { .. } => "NonUnitVector",
            Error::InvalidKernel(..) => "InvalidKernel",
            Error::InvalidModel(..) => "InvalidModel",
            Error::InvalidSets(..) => "InvalidSets",
            Error::Geometry(..) => "Geometry",
            Error::NegativeTime(..) => "NegativeTime",
            Error::MalformedGrid(..) => "MalformedGrid",
            Error::Json(..) => "Json",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors produced by model construction, sampling, and learning.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("smoothing radius {sigma} outside (0, 1/2)")]
    SigmaOutOfRange { sigma: f64 },

    #[error("variable {index} has width {width} exceeding the declared bound {lambda}")]
    WidthViolation { index: usize, width: f64, lambda: f64 },

    #[error("term {term:?} is not a clique of the dependency graph")]
    CliqueInconsistency { term: Vec<usize> },

    #[error("dimension {n} exceeds the enumeration cap {cap}")]
    EnumerationCapExceeded { n: usize, cap: usize },

    #[error(
        "restriction support {support:?} does not match the neighborhood {neighborhood:?} of variable {index}"
    )]
    SupportMismatch {
        index: usize,
        support: Vec<usize>,
        neighborhood: Vec<usize>,
    },

    #[error("pivot {index} lies inside the restriction support")]
    PivotInSupport { index: usize },

    #[error("conditioning event has zero probability")]
    ZeroProbabilityEvent,

    #[error("relevant-set size {found} exceeds the cap {cap}; the threshold is too low")]
    RelevantSetOverflow { found: usize, cap: usize },

    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge { u: usize, v: usize, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed {what}: {reason}")]
    Malformed { what: String, reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid metric profile: field `{field}`: {reason}")]
    InvalidProfile { field: String, reason: String },

    #[error(
        "metric profile is not positive: sampled minimum {min:e} at (theta={theta:.6}, t={t:.6})"
    )]
    NonPositiveMetric { min: f64, theta: f64, t: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("field must be strictly positive, found {value:e} at index {index}")]
    NonPositiveField { value: f64, index: usize },

    #[error("grid mismatch: expected {expected} points, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("missing bound input `{0}`")]
    MissingQuantity(&'static str),

    #[error("operator `{label}` is not Hermitian in its weighted metric (relative residual {residual:e})")]
    NotWeightedHermitian { label: String, residual: f64 },

    #[error("multiplicity mismatch in window {window}: {left} vs {right} eigenvalues")]
    MultiplicityMismatch {
        window: f64,
        left: usize,
        right: usize,
    },

    #[error("spectrum does not cover window {window} (trusted up to {trusted})")]
    WindowNotCovered { window: f64, trusted: f64 },

    #[error("grid of {n_points} points does not resolve the density (tail coefficient {tail:e})")]
    UnresolvedDensity { n_points: usize, tail: f64 },

    #[error("mean curvature is not basic: leafwise variation {variation:e} exceeds {tolerance:e}")]
    NonBasicMeanCurvature { variation: f64, tolerance: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

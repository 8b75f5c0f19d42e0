use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),

    #[error("zero vector where a direction is required")]
    ZeroVector,

    #[error("degenerate segment: endpoints coincide")]
    DegenerateSegment,

    #[error("point lies on the hyperplane")]
    PointOnHyperplane,

    #[error("invalid interval: s = {s} > t = {t}")]
    InvalidInterval { s: f64, t: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("backend {backend} does not support {what}")]
    UnsupportedBackend { backend: &'static str, what: String },

    #[error("zero effective samples")]
    ZeroEffectiveSamples,

    #[error("sampler measure has no declared bounding region")]
    MissingBoundingRegion,

    #[error("query lies outside the sampler's bounding region")]
    OutsideBoundingRegion,

    #[error("all samples degenerate")]
    AllSamplesDegenerate,

    #[error("admissibility violation: {0}")]
    AdmissibilityViolation(String),

    #[error("inconsistent constant fit: {0}")]
    FitInconsistent(String),

    #[error("invalid sampling plan: {0}")]
    InvalidPlan(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

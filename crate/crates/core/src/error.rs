use thiserror::Error;

/// Errors raised by the geometry engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("evaluation outside chart domain at {point:?}")]
    EvaluationOutsideDomain { point: Vec<f64> },

    #[error("metric is singular or not positive-definite at {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("rank deficient: {found} independent vectors, {required} required")]
    RankDeficient { found: usize, required: usize },

    #[error("missing almost-complex structure on {0}")]
    MissingStructure(&'static str),

    #[error("critical point of the map at {point:?}")]
    CriticalPoint { point: Vec<f64> },

    #[error("fibres have real dimension {found}, expected 2")]
    FibreDimension { found: usize },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("target real dimension {dim} is too small (needs > 2)")]
    TargetDimensionTooSmall { dim: usize },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("wrong dimension: expected {expected}, found {found}")]
    WrongDimension { expected: usize, found: usize },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("field evaluation failed: {0}")]
    Evaluation(String),

    #[error("{excluded} of {total} samples excluded as near-critical (cap is 10%)")]
    TooManyExcluded { excluded: usize, total: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;

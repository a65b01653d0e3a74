use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("point has dimension {got}, oracle expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("oracle returned a non-finite value at {0:?}")]
    NonFinite(Vec<f64>),
    #[error("{0}")]
    Evaluation(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{0} must be positive, got {1}")]
    NonPositive(&'static str, f64),
    #[error("sample_budget must be at least 1")]
    EmptyBudget,
    #[error("shrink_factor must lie in (0,1), got {0}")]
    ShrinkFactor(f64),
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("expression: {0}")]
    Expression(#[from] crate::expr::ParseError),
    #[error("unknown catalog id `{0}`")]
    UnknownCatalogId(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

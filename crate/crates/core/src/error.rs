use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("gradient is identically zero")]
    ZeroGradient,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("grid search over {0} angles exceeds the cost guard")]
    CostGuard(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

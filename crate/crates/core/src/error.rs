use thiserror::Error;

pub type Result<T> = std::result::Result<T, DkgError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DkgError {
    /// Invalid grid, shape or parameter combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// `e^{σ‖ξ‖}` would exceed the representable range.
    #[error(
        "range error: σ·‖ξ‖ = {requested:.3} exceeds the supported maximum {max_supported:.3}"
    )]
    Range { requested: f64, max_supported: f64 },

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Radius estimation could not produce a fit.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// A theorem hypothesis was not met by the supplied parameters.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Non-finite values or a failed iteration during a computation.
    #[error("numerical failure at t = {t}: {message}")]
    Numerical { t: f64, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DkgError {
    fn from(e: std::io::Error) -> Self {
        DkgError::Io(e.to_string())
    }
}

use thiserror::Error;

/// Errors produced while constructing market primitives or solving for
/// equilibrium.
#[derive(Debug, Error)]
pub enum Error {
    /// A market primitive failed validation.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    /// No interior equilibrium exists (or the closed-form existence
    /// condition is violated). Carries the inequality or state that failed.
    #[error("no interior equilibrium: {0}")]
    NoInteriorEquilibrium(String),

    /// Fixed-point iteration did not reach the tolerance.
    #[error(
        "value iteration failed to converge after {iterations} iterations (residual {residual:e})"
    )]
    ConvergenceFailure { iterations: usize, residual: f64 },

    /// The DAG is outside the class the operation supports.
    #[error("unsupported DAG: {0}")]
    UnsupportedDag(String),

    /// An argument was outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for this market variant.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Policy enumeration would exceed the stated budget.
    #[error("enumeration budget exceeded: {policies} policies > {budget}")]
    EnumerationBudget { policies: u128, budget: u128 },
}

impl Error {
    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        Error::Validation { field: field.to_string(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

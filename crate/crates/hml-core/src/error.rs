//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failure modes of the physics engine.
///
/// The three variants map onto the three distinct ways a computation can go
/// wrong: the caller supplied an ill-formed input (`Config`), the inputs are
/// well-formed but outside the physical domain of the model (`Domain`), or a
/// numerical routine could not reach its accuracy target (`Convergence`).
#[derive(Debug, Error)]
pub enum HmlError {
    /// Invalid or missing input; `path` names the offending field.
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// Parameters outside the model's domain of validity.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to reach its accuracy target.
    #[error("convergence failure in {context}: achieved error {achieved:.3e}, tolerance {tolerance:.3e}")]
    Convergence {
        context: String,
        achieved: f64,
        tolerance: f64,
    },
}

impl HmlError {
    /// Shorthand for a `Config` error.
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        HmlError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Shorthand for a `Domain` error.
    pub fn domain(message: impl Into<String>) -> Self {
        HmlError::Domain(message.into())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, HmlError>;

//! Error types shared by the whole crate.

use thiserror::Error;

/// Errors produced by configuration validation and the numerical kernels.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A model parameter violates its documented invariant.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or search budget was exhausted before convergence.
    /// `partial` carries the best value obtained so far.
    #[error("numerical failure: {detail} (partial result {partial:e})")]
    Numerical { detail: String, partial: f64 },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

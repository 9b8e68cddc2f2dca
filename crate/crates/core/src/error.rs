use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("special function out of range: {0}")]
    Range(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("negative probability {value:e} at n = {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("truncation budget exceeded: lost mass {lost:e} > budget {budget:e} at dimension {dim}")]
    Truncation { lost: f64, budget: f64, dim: usize },

    #[error("trace drift {drift:e} exceeds tolerance {tol:e}")]
    TraceDrift { drift: f64, tol: f64 },

    #[error("state support is not {required}-spaced (detected spacing {found})")]
    Spacing { required: usize, found: usize },

    #[error("bisection bounds do not bracket the target: {0}")]
    Bracket(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

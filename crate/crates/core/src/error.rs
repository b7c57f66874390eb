use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("state-action pair ({state}, {action}) is infeasible")]
    Infeasible { state: usize, action: usize },
    #[error("non-finite transition image at state {state}, action {action}, shock {shock}")]
    NonFiniteImage { state: usize, action: usize, shock: usize },
    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("consumption {consumption} outside the utility domain at wealth index {state}, savings index {action}")]
    UtilityDomain {
        state: usize,
        action: usize,
        consumption: f64,
    },
}

use alloc::string::String;

/// Errors produced by the core numerics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} is outside its domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("{what} exceeds the configured cap of {cap}")]
    Size { what: &'static str, cap: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("no point of the search grid satisfies the condition (epsilon = {epsilon})")]
    Unbounded { epsilon: f64 },

    #[error("training diverged in restart {restart} at epoch {epoch} (loss = {loss})")]
    Divergence { restart: usize, epoch: usize, loss: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

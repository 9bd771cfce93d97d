use thiserror::Error;

/// Errors produced by the solver and its building blocks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("non-positive water depth {value:e} in cell {cell}")]
    NonPositiveDepth { cell: usize, value: f64 },

    #[error("non-positive reconstructed depth {value:e} at node {node} of cell {cell}")]
    NonPositiveNodeDepth {
        cell: usize,
        node: usize,
        value: f64,
    },

    #[error("depth recovery failed at interface {interface}: no positive root (fallback depth {fallback:e})")]
    DepthRecovery { interface: usize, fallback: f64 },

    #[error("degenerate Roe state (h* = {0:e})")]
    DegenerateRoeState(f64),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("vanishing wave speed, cannot compute a time step")]
    VanishingWaveSpeed,

    #[error("mismatched sizes: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("case {0} has no reference solution")]
    MissingOracle(String),

    #[error("unknown {kind}: {value}")]
    Unknown { kind: &'static str, value: String },
}

impl SolverError {
    /// Errors that come from the numerical solution rather than from user input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            SolverError::NonPositiveDepth { .. }
                | SolverError::NonPositiveNodeDepth { .. }
                | SolverError::DepthRecovery { .. }
                | SolverError::DegenerateRoeState(_)
                | SolverError::NonFinite(_)
                | SolverError::VanishingWaveSpeed
        )
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigenvalue crossing near t = {time}")]
    EigenCrossing { time: f64 },

    #[error("series did not converge: {0}")]
    SeriesDivergence(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("moment of order {order} is not available")]
    DivergentMoment { order: u32 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("step size underflow at t = {time} (h = {step:.3e})")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("expansion point is singular: F(0) = {fidelity:.3e}")]
    SingularExpansion { fidelity: f64 },

    #[error("time grids do not match: {0}")]
    GridMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors produced by the transform, channel and modem layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("measure undefined for zero-energy signal")]
    UndefinedMeasure,

    #[error("domain error at sample {index}: {what}")]
    Domain { what: String, index: usize },

    #[error("singular ratio update at cell {cell}")]
    SingularUpdate { cell: usize },

    #[error("singular recovery at cell {cell}: leading coefficient vanished")]
    SingularRecovery { cell: usize },

    #[error("applicability violated: {0}")]
    Applicability(String),

    #[error("inverse iteration divergent at cell {cell} (amplitude {amplitude:.3e})")]
    Divergence { cell: usize, amplitude: f64 },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("requested band [{lo:.6}, {hi:.6}] outside grid band [{grid_lo:.6}, {grid_hi:.6}]")]
    BandOutOfRange {
        lo: f64,
        hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },

    #[error("peak power guard: {0}")]
    PeakPower(String),

    #[error("step policy rejected: {why}; suggested z_steps = {suggested}")]
    StepPolicy { why: String, suggested: usize },

    #[error("no samples observed for input symbols {0:?}")]
    EmptyInputRow(Vec<usize>),

    #[error("transition matrix is not row-stochastic: {0}")]
    NonStochastic(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

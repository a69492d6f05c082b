use thiserror::Error;

/// Errors raised by the solvers, the corrector quadratures and the reporting layer.
#[derive(Debug, Error)]
pub enum LayerError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge (estimated error {estimate:.3e} > tolerance {tolerance:.3e})")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("linear solve failed: relative residual {residual:.3e} after {iterations} iterations")]
    LinearSolve { residual: f64, iterations: usize },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<LayerError>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LayerError>;

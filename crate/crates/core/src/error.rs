use thiserror::Error;

pub type Result<T> = std::result::Result<T, LandauError>;

#[derive(Debug, Error)]
pub enum LandauError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value at node {index} ({context})")]
    NonFinite { index: usize, context: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite stability bound: {0}")]
    UnstableBound(String),

    #[error("positivity lost in cell {cell} at t = {time}: rho = {rho}, e = {internal_energy}")]
    PositivityLoss {
        cell: usize,
        time: f64,
        rho: f64,
        internal_energy: f64,
    },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LandauError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        LandauError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

use thiserror::Error;

/// Errors raised by the simulators, integrators and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown site id {0}")]
    UnknownSite(usize),

    #[error("no tips available for selection (ledger extinct)")]
    LedgerExtinct,

    #[error("model invariant violated: {0}")]
    Invariant(String),

    #[error("singular state: {0}")]
    Singular(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("infeasible targets for activities {activities:?}")]
    Infeasible { activities: Vec<usize>, costs: Vec<f64> },

    #[error("contour failure: {0}")]
    Contour(String),

    #[error("mismatched comparison: {0}")]
    Mismatch(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

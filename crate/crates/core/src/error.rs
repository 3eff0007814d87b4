use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The request would exceed a configured memory or integer-size budget.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{0} is not a primitive root modulo {1}")]
    NotPrimitiveRoot(u64, u64),

    /// A series or product was requested where it does not converge.
    #[error("divergent: {0}")]
    Divergence(String),

    /// A local Euler factor vanished (to working precision).
    #[error("singular local factor at p = {prime}")]
    Singular { prime: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cache format: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

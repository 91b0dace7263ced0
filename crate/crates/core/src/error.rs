use thiserror::Error;

/// Errors raised by the geometric and numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The input is geometrically degenerate (a point on a plane, coincident endpoints, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Required data is missing or malformed.
    #[error("invalid input: {0}")]
    Input(String),

    /// An iterative or adaptive procedure failed to reach its tolerance.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// A combinatorial enumeration would exceed its size guard.
    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

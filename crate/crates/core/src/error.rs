use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("invalid site {site} for a register of {n} sites")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("site {0} used twice")]
    SiteCollision(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("channel is not completely positive and trace preserving: {0}")]
    NotCptp(String),
    #[error("infeasible reset spacing: {0}")]
    InfeasibleSpacing(String),
    #[error("singular system: eigenvalue {re:.6e}{im:+.6e}i of the jump map is at distance {distance:.3e} from 1")]
    Singular { re: f64, im: f64, distance: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

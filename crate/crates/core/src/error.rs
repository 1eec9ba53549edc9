use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("degree too large: N({d}, {n}) does not fit in 64 bits")]
    DegreeTooLarge { d: usize, n: usize },

    #[error("no closed form for sigma_hat with 1 <= n <= k (k = {k}, n = {n}); use quadrature")]
    NoClosedForm { k: u32, n: usize },

    #[error("quadrature has {have} nodes, need at least {need} for guaranteed accuracy")]
    InsufficientNodes { have: usize, need: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("filter factorization residual {residual:e} exceeds tolerance {tolerance:e}")]
    Conditioning { residual: f64, tolerance: f64 },

    #[error("rejection sampling envelope violated after {0} inflations")]
    EnvelopeExhausted(u32),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether this error comes from a numerical routine rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_)
                | Error::Conditioning { .. }
                | Error::EnvelopeExhausted(_)
                | Error::InsufficientNodes { .. }
        )
    }
}

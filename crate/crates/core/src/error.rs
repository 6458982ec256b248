use std::path::PathBuf;

use crate::wishart::WishartKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "MEV coefficients unavailable for {kind} Wishart (m={m}, n={n}); \
         use the Monte Carlo estimators instead"
    )]
    CoefficientsUnavailable { kind: WishartKind, m: usize, n: usize },

    #[error("covariance matrix is numerically singular (condition estimate {condition:.3e})")]
    SingularCovariance { condition: f64 },

    #[error("invalid eigensystem: {0}")]
    InvalidEigensystem(String),

    #[error("stream index {index} out of range for {streams} streams")]
    InvalidStreamIndex { index: usize, streams: usize },

    #[error("empty SINR report list")]
    EmptyReports,

    #[error("{users} users cannot fill {streams} streams")]
    TooFewUsers { users: usize, streams: usize },

    #[error("unknown {0}")]
    UnknownId(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("analytic form not applicable: {0}")]
    NotApplicable(String),

    #[error(
        "root not bracketed on [{lo:.4e}, {hi:.4e}]: f(lo)={f_lo:.4e}, f(hi)={f_hi:.4e}"
    )]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("quadrature did not converge (estimate {estimate:.6e}, error {error:.3e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

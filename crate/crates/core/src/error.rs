use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("frame is not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("Kelvin map undefined: plane passes through the origin")]
    KelvinUndefined,

    #[error("configuration violates {0}")]
    Inequality(String),

    #[error("decay condition violated: {0}. The conditions p < (n-k)/(k'-k) and mu > k'-k are sharp")]
    Decay(String),

    #[error("tail integral diverges: {0}")]
    DivergentTail(String),

    #[error("tail fit failed: {0}")]
    TailFit(String),

    #[error("limit unresolved: estimate {value:.6e} with error bar {error_bar:.3e}")]
    LimitUnresolved { value: f64, error_bar: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("point not present in sample table")]
    NotInTable,
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn unsupported(msg: impl Into<String>) -> Error {
    Error::Unsupported(msg.into())
}

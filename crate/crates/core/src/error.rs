use thiserror::Error;

/// Errors raised by the solver, the diagnostics and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite value in {term}")]
    Numeric { term: String },

    #[error("time step {dt:e} violates the stability bound; need dt <= {required:e}")]
    Cfl { dt: f64, required: f64 },

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("unknown identifier: {0}")]
    Unknown(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn numeric(term: impl Into<String>) -> Self {
        Error::Numeric { term: term.into() }
    }
}

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum MagicError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("null-class site at position {0}: string has vanishing Haar expectation")]
    NullClass(usize),

    #[error("state is not normalized (norm = {0})")]
    Unnormalized(f64),

    #[error("state has zero norm (raw norm = {0:e})")]
    ZeroNorm(f64),

    #[error("spectrum is not real: max |Im| = {max_imag:e} exceeds {limit:e}")]
    NonRealSpectrum { max_imag: f64, limit: f64 },

    #[error("closed-form eigenvalues do not reconcile with numeric spectrum: {0}")]
    SpectrumMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("sample {index} failed: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<MagicError>,
    },

    #[error("polynomial parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MagicError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(MagicError::Domain(msg.into()))
}

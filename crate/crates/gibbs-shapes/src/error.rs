use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("derivative of `{0}` is not supported")]
    UnsupportedDerivative(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("inconclusive limit: {context}; probes: {probes:?}")]
    InconclusiveLimit {
        context: String,
        probes: Vec<(f64, f64)>,
    },

    #[error("no root: u' never exceeds {0} below 2^60 (mu <= mu_star?)")]
    NoRoot(f64),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("series diverges: {0}")]
    DivergentSeries(String),

    #[error("tail did not certify below k = {0}")]
    NonConvergedTail(u64),

    #[error("partition is empty")]
    EmptyPartition,

    #[error("intervals overlap")]
    OverlappingIntervals,

    #[error("empty grid")]
    EmptyGrid,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

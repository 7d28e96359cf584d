use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parse vertex `{input}`: {reason}")]
    ParseVertex { input: String, reason: String },

    #[error("parse error on line {line}: {reason}")]
    ParseCsv { line: usize, reason: String },

    #[error("function is not harmonic at {vertex} (laplacian residual {residual:e})")]
    NotHarmonic { vertex: String, residual: f64 },

    #[error("enumeration of {what} needs {requested} but the limit is {limit}")]
    EnumerationLimit {
        what: &'static str,
        requested: i64,
        limit: i64,
    },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

use std::path::PathBuf;

use thiserror::Error;

/// Unified error type for model construction, calibration, numerical routines
/// and data loading.
#[derive(Debug, Error)]
pub enum Error {
    /// A model or configuration parameter lies outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// An operation was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The upper income tail is too heavy for the requested quantity.
    /// Means and top shares require a tail exponent strictly above one.
    #[error("heavy tail: {0}")]
    HeavyTail(String),

    /// Job-flow counts imply a reset rate of zero or below.
    #[error("non-positive reset rate: {0}")]
    NonPositiveRate(String),

    /// Root search found no admissible solution in the bracket.
    #[error("no root: {0}")]
    NoRoot(String),

    /// An iterative routine failed to reach its tolerance.
    #[error("did not converge: {0}")]
    NotConverged(String),

    /// A field in an input file failed to parse.
    #[error("parse error in {} at line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// A parsed value violates a documented constraint. `row` is the
    /// 1-based line number in the source file, counting the header.
    #[error("validation error in {} at line {row}: {constraint}", path.display())]
    Validation {
        path: PathBuf,
        row: u64,
        constraint: String,
    },

    /// The requested series is absent from the source file.
    #[error("missing series in {}: {detail}", path.display())]
    MissingSeries { path: PathBuf, detail: String },

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

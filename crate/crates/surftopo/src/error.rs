//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Filesystem I/O failure, with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An image file could not be decoded or has an unsupported layout.
    #[error("image {path}: {reason}")]
    Image { path: PathBuf, reason: String },

    /// A whitespace-separated text matrix could not be parsed.
    #[error("text matrix {path}, line {line}: {reason}")]
    TextMatrix {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// A CSV file (features, diagrams, results) could not be parsed.
    #[error("csv {path}, line {line}: {reason}")]
    Csv {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// Depth values or derived features contain NaN / infinity where finite
    /// numbers are required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Mismatched grid shapes (for example depth map versus label mask).
    #[error(
        "shape mismatch: expected {expected_height}x{expected_width}, got {got_height}x{got_width}"
    )]
    ShapeMismatch {
        expected_height: usize,
        expected_width: usize,
        got_height: usize,
        got_width: usize,
    },

    /// An invalid configuration value (window geometry, descriptor options,
    /// classifier options, experiment plan, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The complex exceeds the size bound of the reference reduction.
    #[error("complex with {cells} cells exceeds the reference-reduction bound of {bound}")]
    ComplexTooLarge { cells: usize, bound: usize },

    /// Cell values decrease from face to coface, so the input is not a
    /// filtration.
    #[error("filtration is not monotone: cell {cell} has value {value} below its face {face} with value {face_value}")]
    NonMonotone {
        cell: usize,
        value: f64,
        face: usize,
        face_value: f64,
    },

    /// A vectorization was asked for on a diagram that still contains
    /// infinite death times.
    #[error("diagram contains {count} unbounded interval(s); map essential classes to finite deaths first")]
    UnboundedIntervals { count: usize },

    /// Training data contains a single class.
    #[error("training data contains only class {0}")]
    SingleClass(u8),

    /// A trained model and a feature table disagree on the feature schema.
    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),

    /// A serialized model could not be read.
    #[error("model file {path}: {reason}")]
    ModelFormat { path: PathBuf, reason: String },

    /// An ensemble with no trained trees was asked for importances.
    #[error("ensemble has no trees: {0}")]
    EmptyEnsemble(String),

    /// A statistical routine received unusable input.
    #[error("statistics: {0}")]
    Stats(String),

    /// An experiment plan cannot be executed against the given features.
    #[error("experiment: {0}")]
    Experiment(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wrap an `std::io::Error` with its path.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A wavelength grid violated its invariants (not strictly increasing,
    /// too short, or non-finite/non-positive values).
    #[error("invalid wavelength grid: {0}")]
    InvalidGrid(String),

    /// A target grid or window reaches outside the source spectrum's range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Input carries too little information to operate on (e.g. fewer than
    /// two unmasked channels for interpolation).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A segment window covers fewer than the required unmasked channels.
    #[error("segment too small: {0}")]
    SegmentTooSmall(String),

    /// A segment has (numerically) zero variance. This is a signaled
    /// condition, not a fatal error: matching maps it to correlation 0.
    #[error("flat segment: standard deviation below threshold")]
    FlatSegment,

    /// Values outside the domain an operation is defined on
    /// (e.g. non-positive reflectance for continuum removal).
    #[error("value domain: {0}")]
    ValueDomain(String),

    /// Feature-dependent operation invoked with an empty feature list.
    #[error("no absorption features")]
    NoFeatures,

    /// Two spectra expected on the same grid are not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Invalid configuration (empty library, bad parameter ranges, ...).
    #[error("configuration: {0}")]
    Config(String),

    /// Text-format parse failure, with a 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Binary/structured format violation (size mismatch, bad magic, ...).
    #[error("format error: {0}")]
    Format(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

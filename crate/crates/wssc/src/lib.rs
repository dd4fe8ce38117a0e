//! Spectral matching by Weighted Sum of Segmented Correlation (WSSC).
//!
//! Materials leave diagnostic absorption features at characteristic
//! positions in reflectance spectra. Instead of comparing whole spectra,
//! this crate matches only those informative segments: the continuum of
//! each spectrum is removed, the library endmember's absorption features
//! delimit the segments, each segment gets a correlation index, and the
//! indices combine into one matching index weighted by FWHM times band
//! depth. Full-spectrum baselines (cosine similarity, whole-domain
//! correlation) are included for comparison.
//!
//! The crate is organized as a library first; see the `examples/` directory
//! for one runnable program per capability, and the `wssc` binary for a thin
//! command-line front end (`extract-segments`, `match`, `classify-cube`,
//! `synth-eval`).

pub mod absorption;
pub mod commands;
pub mod correlation;
pub mod error;
pub mod io;
pub mod matching;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
pub use matching::{CorrelationKind, LibraryEntry, MatchConfig, MatchResult, SpectralLibrary};
pub use spectral::{SegmentData, SegmentWindow, Spectrum, WavelengthGrid};

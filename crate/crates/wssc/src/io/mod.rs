//! File formats: spectral-library CSV, raw float32 band-sequential cubes
//! with JSON headers, classification maps (CSV + PGM score images), and the
//! reusable segments file produced by segment extraction.

mod class_map;
mod cube;
mod library;
mod segments;

pub use class_map::{read_class_map_csv, write_class_map, ClassificationMap};
pub use cube::{write_cube, Cube, CubeHeader, Stripe};
pub use library::{read_library, write_library};
pub use segments::{read_segments, write_segments, EntrySegments, FeatureRecord, SegmentsFile};

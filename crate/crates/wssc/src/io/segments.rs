//! Structured segments file: the features and weights extracted from a
//! library, written by `extract-segments` and reusable by `classify-cube`
//! and `match` to skip re-detection.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::absorption::AbsorptionFeature;
use crate::error::{Error, Result};
use crate::matching::SpectralLibrary;
use crate::spectral::SegmentWindow;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub lo_nm: f64,
    pub hi_nm: f64,
    pub minimum_nm: f64,
    pub depth: f64,
    pub fwhm_nm: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntrySegments {
    pub name: String,
    pub features: Vec<FeatureRecord>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentsFile {
    pub version: u32,
    pub regions: Vec<(f64, f64)>,
    pub entries: Vec<EntrySegments>,
}

impl FeatureRecord {
    pub fn from_feature(f: &AbsorptionFeature) -> Self {
        Self {
            lo_nm: f.window.lo_nm,
            hi_nm: f.window.hi_nm,
            minimum_nm: f.minimum_nm,
            depth: f.depth,
            fwhm_nm: f.fwhm_nm,
            truncated: f.truncated,
        }
    }

    pub fn to_feature(&self) -> Result<AbsorptionFeature> {
        Ok(AbsorptionFeature {
            window: SegmentWindow::new(self.lo_nm, self.hi_nm)?,
            minimum_nm: self.minimum_nm,
            depth: self.depth,
            fwhm_nm: self.fwhm_nm,
            truncated: self.truncated,
        })
    }
}

impl SegmentsFile {
    pub fn from_library(library: &SpectralLibrary) -> Self {
        Self {
            version: 1,
            regions: library
                .regions()
                .iter()
                .map(|w| (w.lo_nm, w.hi_nm))
                .collect(),
            entries: library
                .entries()
                .iter()
                .map(|e| EntrySegments {
                    name: e.name().to_string(),
                    features: e.features().iter().map(FeatureRecord::from_feature).collect(),
                    weights: e.weights().to_vec(),
                })
                .collect(),
        }
    }

    pub fn region_windows(&self) -> Result<Vec<SegmentWindow>> {
        self.regions
            .iter()
            .map(|&(lo, hi)| SegmentWindow::new(lo, hi))
            .collect()
    }

    pub fn entry(&self, name: &str) -> Option<&EntrySegments> {
        self.entries.iter().find(|e| e.name == name)
    }
}

pub fn write_segments(path: &Path, file: &SegmentsFile) -> Result<()> {
    let json = serde_json::to_string_pretty(file)
        .map_err(|e| Error::Format(format!("segments serialization: {e}")))?;
    fs::write(path, json)?;
    Ok(())
}

pub fn read_segments(path: &Path) -> Result<SegmentsFile> {
    let text = fs::read_to_string(path)?;
    let file: SegmentsFile =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("segments file: {e}")))?;
    if file.version != 1 {
        return Err(Error::Format(format!(
            "unsupported segments file version {}",
            file.version
        )));
    }
    Ok(file)
}

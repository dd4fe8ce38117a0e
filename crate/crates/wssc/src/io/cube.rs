//! Hyperspectral cube access: a JSON header describing shape, wavelengths,
//! bad bands and per-spectrometer regions, plus a raw little-endian float32
//! band-sequential payload (`<name>.json` + `<name>.raw`).
//!
//! The payload layout is BSQ: all pixels of band 0 (row-major), then all of
//! band 1, and so on. Pixel access masks bad bands up front, so downstream
//! code never reads them.

use std::fs::{self, File};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SegmentWindow, Spectrum, WavelengthGrid};

/// Self-describing cube header.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubeHeader {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub wavelengths_nm: Vec<f64>,
    pub bad_bands: Vec<usize>,
    /// Per-spectrometer processing regions as `[lo_nm, hi_nm]` intervals,
    /// ascending and non-overlapping. Empty means one region covering the
    /// whole grid.
    pub regions: Vec<(f64, f64)>,
    pub dtype: String,
    pub interleave: String,
}

impl CubeHeader {
    pub fn new(
        rows: usize,
        cols: usize,
        wavelengths_nm: Vec<f64>,
        bad_bands: Vec<usize>,
        regions: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let h = Self {
            rows,
            cols,
            bands: wavelengths_nm.len(),
            wavelengths_nm,
            bad_bands,
            regions,
            dtype: "f32le".into(),
            interleave: "bsq".into(),
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.bands == 0 {
            return Err(Error::Format(format!(
                "cube dimensions must be positive, got {}x{}x{}",
                self.rows, self.cols, self.bands
            )));
        }
        if self.wavelengths_nm.len() != self.bands {
            return Err(Error::Format(format!(
                "{} wavelengths for {} bands",
                self.wavelengths_nm.len(),
                self.bands
            )));
        }
        if self.dtype != "f32le" {
            return Err(Error::Format(format!("unsupported dtype '{}'", self.dtype)));
        }
        if self.interleave != "bsq" {
            return Err(Error::Format(format!(
                "unsupported interleave '{}'",
                self.interleave
            )));
        }
        if let Some(&bad) = self.bad_bands.iter().find(|&&b| b >= self.bands) {
            return Err(Error::Format(format!(
                "bad band index {bad} out of range for {} bands",
                self.bands
            )));
        }
        WavelengthGrid::new(self.wavelengths_nm.clone())
            .map_err(|e| Error::Format(format!("wavelengths: {e}")))?;
        let mut prev_hi = f64::NEG_INFINITY;
        for &(lo, hi) in &self.regions {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::Format(format!("region [{lo}, {hi}] is empty")));
            }
            if lo <= prev_hi {
                return Err(Error::Format(format!(
                    "regions must ascend without overlap; [{lo}, {hi}] starts at or before {prev_hi}"
                )));
            }
            prev_hi = hi;
        }
        self.expected_bytes()?;
        Ok(())
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn expected_bytes(&self) -> Result<u64> {
        (self.rows as u64)
            .checked_mul(self.cols as u64)
            .and_then(|p| p.checked_mul(self.bands as u64))
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Format("cube size overflows".into()))
    }

    pub fn grid(&self) -> Result<WavelengthGrid> {
        WavelengthGrid::new(self.wavelengths_nm.clone())
    }

    /// Per-band usable flag derived from `bad_bands`.
    pub fn band_mask(&self) -> Vec<bool> {
        let mut mask = vec![true; self.bands];
        for &b in &self.bad_bands {
            if b < self.bands {
                mask[b] = false;
            }
        }
        mask
    }

    pub fn region_windows(&self) -> Result<Vec<SegmentWindow>> {
        self.regions
            .iter()
            .map(|&(lo, hi)| SegmentWindow::new(lo, hi))
            .collect()
    }

    /// Channel accounting: for each band, whether it is bad, in a region
    /// (by index), or outside every region. Bad wins over region membership,
    /// so region channel sets, the bad set and the outside set partition the
    /// band set.
    pub fn channel_partition(&self) -> Vec<ChannelAssignment> {
        let mask = self.band_mask();
        (0..self.bands)
            .map(|b| {
                if !mask[b] {
                    return ChannelAssignment::Bad;
                }
                let w = self.wavelengths_nm[b];
                for (r, &(lo, hi)) in self.regions.iter().enumerate() {
                    if w >= lo && w <= hi {
                        return ChannelAssignment::Region(r);
                    }
                }
                if self.regions.is_empty() {
                    ChannelAssignment::Region(0)
                } else {
                    ChannelAssignment::Outside
                }
            })
            .collect()
    }
}

/// Where a band falls in the region/bad-band accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelAssignment {
    Bad,
    Region(usize),
    Outside,
}

/// An open cube: validated header plus a read handle on the payload.
///
/// Pixel access is concurrency-safe (`&self`); the underlying file offset
/// is guarded by a mutex for one-off reads, while bulk access goes through
/// [`Cube::read_stripe`] which reads each band slice once.
#[derive(Debug)]
pub struct Cube {
    header: CubeHeader,
    grid: Arc<WavelengthGrid>,
    band_mask: Vec<bool>,
    data_path: PathBuf,
    file: Mutex<File>,
}

impl Cube {
    /// Opens `<name>.json` + `<name>.raw`.
    pub fn open(header_path: &Path) -> Result<Self> {
        let data_path = header_path.with_extension("raw");
        Self::open_with(header_path, &data_path)
    }

    pub fn open_with(header_path: &Path, data_path: &Path) -> Result<Self> {
        let text = fs::read_to_string(header_path)?;
        let header: CubeHeader =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("header: {e}")))?;
        header.validate()?;
        let file = File::open(data_path)?;
        let actual = file.metadata()?.len();
        let expected = header.expected_bytes()?;
        if actual != expected {
            return Err(Error::Format(format!(
                "payload is {actual} bytes, header implies {expected} ({}x{}x{} f32)",
                header.rows, header.cols, header.bands
            )));
        }
        let grid = Arc::new(header.grid()?);
        let band_mask = header.band_mask();
        Ok(Self {
            header,
            grid,
            band_mask,
            data_path: data_path.to_path_buf(),
            file: Mutex::new(file),
        })
    }

    pub fn header(&self) -> &CubeHeader {
        &self.header
    }

    pub fn grid(&self) -> &Arc<WavelengthGrid> {
        &self.grid
    }

    pub fn data_path(&self) -> &Path {
        &self.data_path
    }

    /// One pixel's spectrum with bad bands pre-masked.
    pub fn pixel_spectrum(&self, row: usize, col: usize) -> Result<Spectrum> {
        let h = &self.header;
        if row >= h.rows || col >= h.cols {
            return Err(Error::OutOfRange(format!(
                "pixel ({row}, {col}) outside {}x{}",
                h.rows, h.cols
            )));
        }
        let plane = (h.rows * h.cols) as u64;
        let pixel = (row * h.cols + col) as u64;
        let mut values = Vec::with_capacity(h.bands);
        {
            let mut file = self.file.lock().expect("cube file lock");
            let mut buf = [0u8; 4];
            for b in 0..h.bands {
                file.seek(SeekFrom::Start((b as u64 * plane + pixel) * 4))?;
                file.read_exact(&mut buf)?;
                values.push(f32::from_le_bytes(buf) as f64);
            }
        }
        self.spectrum_from_values(values)
    }

    fn spectrum_from_values(&self, values: Vec<f64>) -> Result<Spectrum> {
        let mut mask = self.band_mask.clone();
        // Non-finite payload in a usable band masks that channel for this
        // pixel rather than failing the whole pixel.
        for (i, v) in values.iter().enumerate() {
            if mask[i] && !v.is_finite() {
                mask[i] = false;
            }
        }
        Spectrum::new(Arc::clone(&self.grid), values, mask)
    }

    /// Reads `nrows` rows starting at `row0` across all bands: one
    /// contiguous read per band, `nrows * cols * bands * 4` bytes of memory.
    pub fn read_stripe(&self, row0: usize, nrows: usize) -> Result<Stripe> {
        let h = &self.header;
        if row0 + nrows > h.rows || nrows == 0 {
            return Err(Error::OutOfRange(format!(
                "stripe rows {row0}..{} outside 0..{}",
                row0 + nrows,
                h.rows
            )));
        }
        let plane = h.rows * h.cols;
        let stripe_pixels = nrows * h.cols;
        let mut data = vec![0f32; stripe_pixels * h.bands];
        {
            let mut file = self.file.lock().expect("cube file lock");
            let mut bytes = vec![0u8; stripe_pixels * 4];
            for b in 0..h.bands {
                let offset = ((b * plane + row0 * h.cols) * 4) as u64;
                file.seek(SeekFrom::Start(offset))?;
                file.read_exact(&mut bytes)?;
                for (k, chunk) in bytes.chunks_exact(4).enumerate() {
                    data[b * stripe_pixels + k] =
                        f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
                }
            }
        }
        Ok(Stripe {
            row0,
            nrows,
            cols: h.cols,
            bands: h.bands,
            data,
        })
    }

    /// Stripe height that keeps a stripe buffer within `budget_bytes`.
    pub fn stripe_rows_for_budget(&self, budget_bytes: usize) -> usize {
        let per_row = self.header.cols * self.header.bands * 4;
        (budget_bytes / per_row.max(1)).clamp(1, self.header.rows)
    }

    /// Spectrum of a pixel inside a stripe previously read from this cube.
    pub fn stripe_spectrum(&self, stripe: &Stripe, row: usize, col: usize) -> Result<Spectrum> {
        let values = stripe.pixel_values(row, col)?;
        self.spectrum_from_values(values)
    }
}

/// A band-sequential slab of `nrows` consecutive rows.
#[derive(Debug)]
pub struct Stripe {
    row0: usize,
    nrows: usize,
    cols: usize,
    bands: usize,
    /// Layout: `[band][stripe_row][col]`.
    data: Vec<f32>,
}

impl Stripe {
    pub fn row0(&self) -> usize {
        self.row0
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    fn pixel_values(&self, row: usize, col: usize) -> Result<Vec<f64>> {
        if row < self.row0 || row >= self.row0 + self.nrows || col >= self.cols {
            return Err(Error::OutOfRange(format!(
                "pixel ({row}, {col}) outside stripe rows {}..{}",
                self.row0,
                self.row0 + self.nrows
            )));
        }
        let stripe_pixels = self.nrows * self.cols;
        let base = (row - self.row0) * self.cols + col;
        Ok((0..self.bands)
            .map(|b| self.data[b * stripe_pixels + base] as f64)
            .collect())
    }
}

/// Writes header JSON and the BSQ payload (`data` in band-major layout,
/// `bands * rows * cols` values).
pub fn write_cube(header: &CubeHeader, data: &[f32], header_path: &Path) -> Result<()> {
    header.validate()?;
    let expected = header.rows * header.cols * header.bands;
    if data.len() != expected {
        return Err(Error::Format(format!(
            "payload has {} values, header implies {expected}",
            data.len()
        )));
    }
    let json = serde_json::to_string_pretty(header)
        .map_err(|e| Error::Format(format!("header serialization: {e}")))?;
    fs::write(header_path, json)?;
    let mut f = File::create(header_path.with_extension("raw"))?;
    let mut bytes = Vec::with_capacity(data.len() * 4);
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&bytes)?;
    Ok(())
}

//! Fundamental spectrum representation: wavelength grids, masked reflectance
//! spectra, segment windows, grid alignment and standardization.
//!
//! Everything downstream (continuum removal, correlation, matching) operates
//! on these types. All functions here are pure; values are immutable after
//! construction.

use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default maximum number of consecutive masked source channels that
/// [`resample`] will interpolate across. Wider gaps (e.g. atmospheric water
/// bands) are masked in the output instead of being bridged.
pub const DEFAULT_MAX_GAP: usize = 3;

/// Relative threshold on the standard deviation below which a segment is
/// treated as flat (carrying no shape information).
const FLAT_STD_REL_EPS: f64 = 1e-12;
/// Absolute floor for the flat-segment threshold.
const FLAT_STD_ABS_FLOOR: f64 = 1e-300;

/// Channel-center wavelengths in nanometers, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct WavelengthGrid {
    wavelengths: Vec<f64>,
}

impl WavelengthGrid {
    /// Builds a grid from channel-center wavelengths.
    ///
    /// Wavelengths must be finite, positive, strictly increasing, and there
    /// must be at least two of them.
    pub fn new(wavelengths: Vec<f64>) -> Result<Self> {
        if wavelengths.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 channels, got {}",
                wavelengths.len()
            )));
        }
        for (i, &w) in wavelengths.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "channel {i}: wavelength {w} is not finite and positive"
                )));
            }
            if i > 0 && wavelengths[i - 1] >= w {
                return Err(Error::InvalidGrid(format!(
                    "channel {i}: wavelengths not strictly increasing ({} >= {w})",
                    wavelengths[i - 1]
                )));
            }
        }
        Ok(Self { wavelengths })
    }

    /// Uniformly spaced grid covering `[start_nm, stop_nm]` inclusive.
    pub fn uniform(start_nm: f64, stop_nm: f64, step_nm: f64) -> Result<Self> {
        if !step_nm.is_finite() || step_nm <= 0.0 || !stop_nm.is_finite() || stop_nm <= start_nm {
            return Err(Error::InvalidGrid(format!(
                "uniform grid needs stop > start and step > 0 (got {start_nm}..{stop_nm} step {step_nm})"
            )));
        }
        let n = ((stop_nm - start_nm) / step_nm).floor() as usize + 1;
        Self::new((0..n).map(|i| start_nm + i as f64 * step_nm).collect())
    }

    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: length >= 2
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn min_nm(&self) -> f64 {
        self.wavelengths[0]
    }

    pub fn max_nm(&self) -> f64 {
        *self.wavelengths.last().unwrap()
    }

    /// Median spacing between adjacent channels, in nanometers.
    pub fn median_spacing_nm(&self) -> f64 {
        let mut gaps: Vec<f64> = self.wavelengths.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(|a, b| a.total_cmp(b));
        gaps[gaps.len() / 2]
    }

    /// Index range of channels with `lo_nm <= wavelength <= hi_nm`.
    pub fn range_indices(&self, lo_nm: f64, hi_nm: f64) -> Range<usize> {
        let start = self.wavelengths.partition_point(|&w| w < lo_nm);
        let end = self.wavelengths.partition_point(|&w| w <= hi_nm);
        start..end.max(start)
    }
}

/// A reflectance spectrum on a [`WavelengthGrid`] with a per-channel
/// usable/bad mask (`true` = usable). Masked channels may hold any payload,
/// including NaN; no operation reads them.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Arc<WavelengthGrid>,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl Spectrum {
    /// Builds a spectrum sharing an existing grid.
    pub fn new(grid: Arc<WavelengthGrid>, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if values.len() != grid.len() || mask.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "grid has {} channels, values {} and mask {}",
                grid.len(),
                values.len(),
                mask.len()
            )));
        }
        for i in 0..values.len() {
            if mask[i] && !values[i].is_finite() {
                return Err(Error::ValueDomain(format!(
                    "unmasked channel {i} holds non-finite value {}",
                    values[i]
                )));
            }
        }
        Ok(Self { grid, values, mask })
    }

    /// Builds a fully unmasked spectrum from an owned grid.
    pub fn unmasked(grid: WavelengthGrid, values: Vec<f64>) -> Result<Self> {
        let mask = vec![true; grid.len()];
        Self::new(Arc::new(grid), values, mask)
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<WavelengthGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_usable(&self, channel: usize) -> bool {
        self.mask[channel]
    }

    pub fn unmasked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Two spectra are grid-compatible when they share the same wavelengths.
    pub fn same_grid(&self, other: &Spectrum) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
            || self.grid.wavelengths() == other.grid.wavelengths()
    }

    /// Returns a copy with the given channels additionally masked.
    pub fn with_masked_channels(&self, channels: &[usize]) -> Spectrum {
        let mut mask = self.mask.clone();
        for &c in channels {
            if c < mask.len() {
                mask[c] = false;
            }
        }
        Spectrum {
            grid: Arc::clone(&self.grid),
            values: self.values.clone(),
            mask,
        }
    }
}

/// A wavelength interval `[lo_nm, hi_nm]` delimiting one matching segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentWindow {
    pub lo_nm: f64,
    pub hi_nm: f64,
}

impl SegmentWindow {
    pub fn new(lo_nm: f64, hi_nm: f64) -> Result<Self> {
        if !lo_nm.is_finite() || !hi_nm.is_finite() || lo_nm >= hi_nm {
            return Err(Error::InvalidGrid(format!(
                "segment window needs finite lo < hi, got [{lo_nm}, {hi_nm}]"
            )));
        }
        Ok(Self { lo_nm, hi_nm })
    }

    /// Window spanning a whole grid.
    pub fn covering(grid: &WavelengthGrid) -> Self {
        Self {
            lo_nm: grid.min_nm(),
            hi_nm: grid.max_nm(),
        }
    }

    pub fn width_nm(&self) -> f64 {
        self.hi_nm - self.lo_nm
    }

    pub fn contains(&self, wavelength_nm: f64) -> bool {
        wavelength_nm >= self.lo_nm && wavelength_nm <= self.hi_nm
    }
}

/// Aligned library/test value pairs restricted to one segment window.
///
/// Both sides are sampled on the identical sub-grid; alignment is guaranteed
/// by extraction from spectra sharing a grid.
#[derive(Debug, Clone)]
pub struct SegmentData {
    window: SegmentWindow,
    lib_values: Vec<f64>,
    test_values: Vec<f64>,
}

impl SegmentData {
    pub fn new(window: SegmentWindow, lib_values: Vec<f64>, test_values: Vec<f64>) -> Result<Self> {
        if lib_values.len() != test_values.len() {
            return Err(Error::GridMismatch(format!(
                "segment sides differ in length: {} vs {}",
                lib_values.len(),
                test_values.len()
            )));
        }
        if lib_values.len() < 3 {
            return Err(Error::SegmentTooSmall(format!(
                "need at least 3 channels, got {}",
                lib_values.len()
            )));
        }
        Ok(Self {
            window,
            lib_values,
            test_values,
        })
    }

    pub fn window(&self) -> &SegmentWindow {
        &self.window
    }

    pub fn lib_values(&self) -> &[f64] {
        &self.lib_values
    }

    pub fn test_values(&self) -> &[f64] {
        &self.test_values
    }

    /// Number of channel pairs in the segment.
    pub fn n(&self) -> usize {
        self.lib_values.len()
    }
}

/// Resamples `spectrum` onto `target` by piecewise-linear interpolation
/// between unmasked neighbors, with the default masked-gap policy
/// ([`DEFAULT_MAX_GAP`]).
pub fn resample(spectrum: &Spectrum, target: Arc<WavelengthGrid>) -> Result<Spectrum> {
    resample_with_max_gap(spectrum, target, DEFAULT_MAX_GAP)
}

/// Resamples onto `target`, masking any target channel that falls inside a
/// run of more than `max_gap` consecutive masked source channels.
///
/// The target range must lie within the source grid range. Target channels
/// beyond the outermost unmasked source channels are masked (no
/// extrapolation).
pub fn resample_with_max_gap(
    spectrum: &Spectrum,
    target: Arc<WavelengthGrid>,
    max_gap: usize,
) -> Result<Spectrum> {
    let src = spectrum.grid();
    if target.min_nm() < src.min_nm() || target.max_nm() > src.max_nm() {
        return Err(Error::OutOfRange(format!(
            "target [{}, {}] nm extends beyond source [{}, {}] nm",
            target.min_nm(),
            target.max_nm(),
            src.min_nm(),
            src.max_nm()
        )));
    }
    // Unmasked support: (wavelength, value, original channel index).
    let support: Vec<(f64, f64, usize)> = (0..spectrum.len())
        .filter(|&i| spectrum.is_usable(i))
        .map(|i| (src.wavelengths()[i], spectrum.values()[i], i))
        .collect();
    if support.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "resampling needs at least 2 unmasked source channels, got {}",
            support.len()
        )));
    }

    let mut values = Vec::with_capacity(target.len());
    let mut mask = Vec::with_capacity(target.len());
    for &w in target.wavelengths() {
        let pos = support.partition_point(|&(sw, _, _)| sw < w);
        if pos < support.len() && support[pos].0 == w {
            values.push(support[pos].1);
            mask.push(true);
            continue;
        }
        if pos == 0 || pos == support.len() {
            // Outside the unmasked support: cannot interpolate.
            values.push(f64::NAN);
            mask.push(false);
            continue;
        }
        let (wl, vl, il) = support[pos - 1];
        let (wr, vr, ir) = support[pos];
        let masked_between = ir - il - 1;
        if masked_between > max_gap {
            values.push(f64::NAN);
            mask.push(false);
            continue;
        }
        let t = (w - wl) / (wr - wl);
        values.push(vl + t * (vr - vl));
        mask.push(true);
    }
    Spectrum::new(target, values, mask)
}

/// Extracts aligned value pairs for `window` from two spectra on the same
/// grid, keeping only channels unmasked in both.
pub fn extract_segment(
    library: &Spectrum,
    test: &Spectrum,
    window: &SegmentWindow,
) -> Result<SegmentData> {
    if !library.same_grid(test) {
        return Err(Error::GridMismatch(
            "library and test spectra are on different grids".into(),
        ));
    }
    let range = library.grid().range_indices(window.lo_nm, window.hi_nm);
    let mut lib_values = Vec::new();
    let mut test_values = Vec::new();
    for i in range {
        if library.is_usable(i) && test.is_usable(i) {
            lib_values.push(library.values()[i]);
            test_values.push(test.values()[i]);
        }
    }
    if lib_values.len() < 3 {
        return Err(Error::SegmentTooSmall(format!(
            "window [{}, {}] nm covers {} channels unmasked in both spectra, need 3",
            window.lo_nm,
            window.hi_nm,
            lib_values.len()
        )));
    }
    SegmentData::new(*window, lib_values, test_values)
}

/// Threshold below which a standard deviation counts as flat, relative to
/// the magnitude of the input values.
pub(crate) fn flat_threshold(values: &[f64]) -> f64 {
    let max_abs = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (FLAT_STD_REL_EPS * max_abs).max(FLAT_STD_ABS_FLOOR)
}

/// Mean and population standard deviation (divide by n).
pub(crate) fn mean_and_pop_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Shifts and scales `values` to mean 0 and population standard deviation 1.
///
/// The population (1/n) deviation is used so that the sum of squares of the
/// output equals n. A segment whose deviation falls below the flat threshold
/// yields [`Error::FlatSegment`]; callers that combine segments map this to
/// correlation 0 rather than aborting.
pub fn standardize(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "standardize needs at least 2 values, got {}",
            values.len()
        )));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput(format!(
            "standardize requires finite values, got {bad}"
        )));
    }
    let (mean, std) = mean_and_pop_std(values);
    if std < flat_threshold(values) {
        return Err(Error::FlatSegment);
    }
    Ok(values.iter().map(|v| (v - mean) / std).collect())
}

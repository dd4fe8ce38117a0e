//! Continuum removal and absorption-feature measurement.
//!
//! The continuum is the upper convex hull of the unmasked (wavelength,
//! reflectance) points, evaluated by linear interpolation between hull
//! vertices. Dividing by it isolates absorption features from the overall
//! spectral slope; features are then measured by band minimum, depth and
//! FWHM, which drive the matching weights.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{SegmentWindow, Spectrum, WavelengthGrid};

/// Channels with ratio at or above `1 - CONTACT_EPS` count as hull contacts
/// when delimiting absorption runs.
pub const CONTACT_EPS: f64 = 1e-6;

/// Default minimum band depth for feature detection.
pub const DEFAULT_MIN_DEPTH: f64 = 0.02;

/// Default minimum feature width: twice the median channel spacing, which
/// rejects single-channel noise spikes.
pub fn default_min_width_nm(grid: &WavelengthGrid) -> f64 {
    2.0 * grid.median_spacing_nm()
}

/// A spectrum divided by its fitted continuum.
#[derive(Debug, Clone)]
pub struct ContinuumRemovedSpectrum {
    grid: Arc<WavelengthGrid>,
    ratio: Vec<f64>,
    continuum: Vec<f64>,
    mask: Vec<bool>,
}

impl ContinuumRemovedSpectrum {
    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<WavelengthGrid> {
        &self.grid
    }

    /// Continuum-removed values; NaN at masked channels.
    pub fn ratio(&self) -> &[f64] {
        &self.ratio
    }

    /// Fitted hull values; NaN at masked channels.
    pub fn continuum(&self) -> &[f64] {
        &self.continuum
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_usable(&self, channel: usize) -> bool {
        self.mask[channel]
    }

    /// The ratio repackaged as a [`Spectrum`] for segment extraction.
    pub fn ratio_spectrum(&self) -> Spectrum {
        Spectrum::new(Arc::clone(&self.grid), self.ratio.clone(), self.mask.clone())
            .expect("ratio values are finite wherever unmasked")
    }
}

/// One absorption feature of a continuum-removed spectrum.
#[derive(Debug, Clone, Copy)]
pub struct AbsorptionFeature {
    /// Contact-to-contact wavelength interval containing the absorption.
    pub window: SegmentWindow,
    /// Wavelength of the band minimum.
    pub minimum_nm: f64,
    /// `1 - ratio` at the band minimum, in (0, 1].
    pub depth: f64,
    /// Full width at half maximum, in nanometers.
    pub fwhm_nm: f64,
    /// Set when a half-depth crossing ran into the window edge.
    pub truncated: bool,
}

/// Result of a FWHM measurement.
#[derive(Debug, Clone, Copy)]
pub struct FwhmMeasurement {
    pub fwhm_nm: f64,
    pub truncated: bool,
}

/// Upper convex hull over `(x, y)` points with strictly increasing x,
/// evaluated back at every x. Collinear vertices are kept, so points lying
/// exactly on the hull keep their exact value.
fn upper_hull_values(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    debug_assert!(xs.len() >= 2 && xs.len() == ys.len());
    let cross = |o: usize, a: usize, b: usize| -> f64 {
        (xs[a] - xs[o]) * (ys[b] - ys[o]) - (ys[a] - ys[o]) * (xs[b] - xs[o])
    };
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        // Positive cross means the previous vertex dips below the chord.
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) > 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    let mut out = vec![0.0; xs.len()];
    let mut seg = 0;
    for i in 0..xs.len() {
        while seg + 1 < hull.len() && xs[hull[seg + 1]] < xs[i] {
            seg += 1;
        }
        if hull[seg] == i || xs[hull[seg]] == xs[i] {
            out[i] = ys[hull[seg]];
        } else if seg + 1 < hull.len() && xs[hull[seg + 1]] == xs[i] {
            out[i] = ys[hull[seg + 1]];
        } else {
            let (x0, y0) = (xs[hull[seg]], ys[hull[seg]]);
            let (x1, y1) = (xs[hull[seg + 1]], ys[hull[seg + 1]]);
            out[i] = y0 + (y1 - y0) * (xs[i] - x0) / (x1 - x0);
        }
    }
    out
}

/// Removes the continuum of a whole spectrum.
///
/// Requires at least 3 unmasked channels and strictly positive reflectance
/// wherever unmasked. Masked channels stay masked.
pub fn continuum_remove(spectrum: &Spectrum) -> Result<ContinuumRemovedSpectrum> {
    let n = spectrum.len();
    let mut crs = ContinuumRemovedSpectrum {
        grid: Arc::clone(spectrum.grid_arc()),
        ratio: vec![f64::NAN; n],
        continuum: vec![f64::NAN; n],
        mask: vec![false; n],
    };
    let idx: Vec<usize> = (0..n).filter(|&i| spectrum.is_usable(i)).collect();
    if idx.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "continuum removal needs at least 3 unmasked channels, got {}",
            idx.len()
        )));
    }
    if let Some(&bad) = idx.iter().find(|&&i| spectrum.values()[i] <= 0.0) {
        return Err(Error::ValueDomain(format!(
            "reflectance must be positive for continuum removal (channel {bad} = {})",
            spectrum.values()[bad]
        )));
    }
    fill_hull(spectrum, &idx, &mut crs);
    Ok(crs)
}

/// Removes the continuum independently per wavelength region.
///
/// This is the pipeline form used on test pixels: it is lenient where the
/// whole-spectrum form is strict. Non-positive channels are masked instead
/// of failing, regions with fewer than 3 usable channels are masked out, and
/// channels outside every region are masked. An empty region list means one
/// region covering the whole grid.
pub fn continuum_remove_regions(
    spectrum: &Spectrum,
    regions: &[SegmentWindow],
) -> Result<ContinuumRemovedSpectrum> {
    let n = spectrum.len();
    let mut crs = ContinuumRemovedSpectrum {
        grid: Arc::clone(spectrum.grid_arc()),
        ratio: vec![f64::NAN; n],
        continuum: vec![f64::NAN; n],
        mask: vec![false; n],
    };
    let whole = [SegmentWindow::covering(spectrum.grid())];
    let regions = if regions.is_empty() { &whole } else { regions };
    for region in regions {
        let idx: Vec<usize> = spectrum
            .grid()
            .range_indices(region.lo_nm, region.hi_nm)
            .filter(|&i| spectrum.is_usable(i) && spectrum.values()[i] > 0.0)
            .collect();
        if idx.len() < 3 {
            continue;
        }
        fill_hull(spectrum, &idx, &mut crs);
    }
    Ok(crs)
}

fn fill_hull(spectrum: &Spectrum, idx: &[usize], crs: &mut ContinuumRemovedSpectrum) {
    let xs: Vec<f64> = idx.iter().map(|&i| spectrum.grid().wavelengths()[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| spectrum.values()[i]).collect();
    let hull = upper_hull_values(&xs, &ys);
    for (k, &i) in idx.iter().enumerate() {
        crs.continuum[i] = hull[k];
        crs.ratio[i] = ys[k] / hull[k];
        crs.mask[i] = true;
    }
}

/// Finds absorption features: maximal runs of channels below the contact
/// level, bounded by hull contacts, that are at least `min_depth` deep and
/// at least `min_width_nm` wide (width measured as FWHM).
///
/// Two local minima inside one hull-bounded run (a doublet) stay one
/// feature whose depth is the deeper lobe. Returned features are disjoint
/// and ordered by window position; an empty list is a valid result.
pub fn detect_features(
    crs: &ContinuumRemovedSpectrum,
    min_depth: f64,
    min_width_nm: f64,
) -> Vec<AbsorptionFeature> {
    let lam = crs.grid().wavelengths();
    let usable: Vec<usize> = (0..crs.ratio().len()).filter(|&i| crs.is_usable(i)).collect();
    let contact = |i: usize| crs.ratio()[i] >= 1.0 - CONTACT_EPS;

    let mut features = Vec::new();
    let mut k = 0;
    while k < usable.len() {
        if contact(usable[k]) {
            k += 1;
            continue;
        }
        let start = k;
        while k < usable.len() && !contact(usable[k]) {
            k += 1;
        }
        // Hull geometry guarantees contacts on both sides of a run; a run
        // touching the ends of the usable range has no window and is skipped.
        if start == 0 || k == usable.len() {
            continue;
        }
        let window = SegmentWindow {
            lo_nm: lam[usable[start - 1]],
            hi_nm: lam[usable[k]],
        };
        let Ok((minimum_nm, ratio_min)) = band_minimum(crs, &window) else {
            continue;
        };
        let depth = 1.0 - ratio_min;
        if depth <= 0.0 {
            continue;
        }
        let Ok(width) = fwhm(crs, &window, minimum_nm) else {
            continue;
        };
        if depth >= min_depth && width.fwhm_nm >= min_width_nm {
            features.push(AbsorptionFeature {
                window,
                minimum_nm,
                depth,
                fwhm_nm: width.fwhm_nm,
                truncated: width.truncated,
            });
        }
    }
    features
}

/// Wavelength and ratio of the deepest channel in the window; ties break
/// toward the lower wavelength.
pub fn band_minimum(
    crs: &ContinuumRemovedSpectrum,
    window: &SegmentWindow,
) -> Result<(f64, f64)> {
    let lam = crs.grid().wavelengths();
    let mut best: Option<(f64, f64)> = None;
    let mut count = 0;
    for i in crs.grid().range_indices(window.lo_nm, window.hi_nm) {
        if !crs.is_usable(i) {
            continue;
        }
        count += 1;
        let r = crs.ratio()[i];
        if best.is_none_or(|(_, rb)| r < rb) {
            best = Some((lam[i], r));
        }
    }
    if count < 3 {
        return Err(Error::SegmentTooSmall(format!(
            "window [{}, {}] nm covers {count} unmasked channels, need 3",
            window.lo_nm, window.hi_nm
        )));
    }
    Ok(best.unwrap())
}

/// Full width at half maximum around the band minimum.
///
/// The half-depth level is `1 - depth/2` in ratio units. Crossings are found
/// by linear interpolation between adjacent channels walking outward from
/// the minimum; a side that never reaches the level inside the window falls
/// back to the window edge and marks the measurement truncated.
pub fn fwhm(
    crs: &ContinuumRemovedSpectrum,
    window: &SegmentWindow,
    minimum_nm: f64,
) -> Result<FwhmMeasurement> {
    let lam = crs.grid().wavelengths();
    let mut xs = Vec::new();
    let mut rs = Vec::new();
    for i in crs.grid().range_indices(window.lo_nm, window.hi_nm) {
        if crs.is_usable(i) {
            xs.push(lam[i]);
            rs.push(crs.ratio()[i]);
        }
    }
    if xs.len() < 3 {
        return Err(Error::SegmentTooSmall(format!(
            "window [{}, {}] nm covers {} unmasked channels, need 3",
            window.lo_nm,
            window.hi_nm,
            xs.len()
        )));
    }
    let m = xs
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (*a - minimum_nm).abs().total_cmp(&(*b - minimum_nm).abs())
        })
        .map(|(i, _)| i)
        .unwrap();
    let depth = 1.0 - rs[m];
    if depth <= 0.0 {
        return Err(Error::DegenerateInput(format!(
            "no absorption depth at {minimum_nm} nm"
        )));
    }
    let level = 1.0 - depth / 2.0;

    let mut truncated = false;
    let left = {
        let mut found = None;
        for k in (0..m).rev() {
            if rs[k] >= level {
                let t = (rs[k] - level) / (rs[k] - rs[k + 1]);
                found = Some(xs[k] + t * (xs[k + 1] - xs[k]));
                break;
            }
        }
        found.unwrap_or_else(|| {
            truncated = true;
            window.lo_nm
        })
    };
    let right = {
        let mut found = None;
        for k in (m + 1)..xs.len() {
            if rs[k] >= level {
                let t = (rs[k] - level) / (rs[k] - rs[k - 1]);
                found = Some(xs[k] - t * (xs[k] - xs[k - 1]));
                break;
            }
        }
        found.unwrap_or_else(|| {
            truncated = true;
            window.hi_nm
        })
    };
    Ok(FwhmMeasurement {
        fwhm_nm: right - left,
        truncated,
    })
}

/// Normalized per-feature weights: `w_i = f_i * d_i / sum(f_j * d_j)`.
pub fn compute_weights(features: &[AbsorptionFeature]) -> Result<Vec<f64>> {
    if features.is_empty() {
        return Err(Error::NoFeatures);
    }
    let mut products = Vec::with_capacity(features.len());
    for f in features {
        if f.depth.is_nan() || f.depth <= 0.0 || f.fwhm_nm.is_nan() || f.fwhm_nm <= 0.0 {
            return Err(Error::ValueDomain(format!(
                "feature at {} nm has non-positive depth ({}) or fwhm ({})",
                f.minimum_nm, f.depth, f.fwhm_nm
            )));
        }
        products.push(f.fwhm_nm * f.depth);
    }
    let total: f64 = products.iter().sum();
    Ok(products.into_iter().map(|p| p / total).collect())
}

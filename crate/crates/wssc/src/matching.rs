//! Assembling per-segment correlations into the weighted matching index,
//! classifying test spectra against a library, and the full-spectrum
//! baselines (cosine similarity, whole-domain correlation).

use std::sync::Arc;

use crate::absorption::{
    compute_weights, continuum_remove_regions, detect_features, AbsorptionFeature,
};
use crate::correlation::{clark_index, pearson_index};
use crate::error::{Error, Result};
use crate::spectral::{
    extract_segment, resample_with_max_gap, SegmentWindow, Spectrum, WavelengthGrid,
    DEFAULT_MAX_GAP,
};

/// Which correlation kernel scores each segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    /// Signed correlation on standardized segments (the default).
    Pearson,
    /// Unsigned geometric mean of the two regression slopes.
    Clark,
}

impl std::fmt::Display for CorrelationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorrelationKind::Pearson => write!(f, "pearson"),
            CorrelationKind::Clark => write!(f, "clark"),
        }
    }
}

/// Matching configuration.
#[derive(Debug, Clone)]
pub struct MatchConfig {
    pub correlation_kind: CorrelationKind,
    /// Replace each segment correlation by `max(c, 0)` before summation,
    /// i.e. do not penalize anti-correlated segments.
    pub clamp_negative: bool,
    /// Minimum number of informative segments for a result to count as
    /// valid.
    pub min_valid_segments: usize,
    /// Correlate raw reflectance instead of the continuum-removed ratio
    /// (ablation switch; the pipeline default is the ratio).
    pub raw_reflectance: bool,
    /// Masked-gap policy handed to resampling when the test spectrum is not
    /// on the library grid.
    pub max_gap: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            correlation_kind: CorrelationKind::Pearson,
            clamp_negative: false,
            min_valid_segments: 1,
            raw_reflectance: false,
            max_gap: DEFAULT_MAX_GAP,
        }
    }
}

impl MatchConfig {
    /// Default classification threshold: 0.5 when negative correlations are
    /// clamped away (a match must explain half the weighted evidence),
    /// 0 otherwise.
    pub fn default_threshold(&self) -> f64 {
        if self.clamp_negative || self.correlation_kind == CorrelationKind::Clark {
            0.5
        } else {
            0.0
        }
    }

    /// Matching index range under this configuration.
    pub fn index_range(&self) -> (f64, f64) {
        if self.clamp_negative || self.correlation_kind == CorrelationKind::Clark {
            (0.0, 1.0)
        } else {
            (-1.0, 1.0)
        }
    }
}

/// Feature-detection settings used when building library entries.
#[derive(Debug, Clone, Copy)]
pub struct DetectParams {
    pub min_depth: f64,
    /// Minimum feature width (FWHM); `None` uses twice the median channel
    /// spacing of the library grid.
    pub min_width_nm: Option<f64>,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            min_depth: crate::absorption::DEFAULT_MIN_DEPTH,
            min_width_nm: None,
        }
    }
}

/// A named endmember with its precomputed diagnostic segments.
///
/// The segment windows, depths, FWHMs and weights are measured on the
/// library spectrum, not the test spectrum: a mixed test pixel may carry the
/// endmember's bands suppressed or distorted, while the library endmember
/// defines where the diagnostic evidence lives.
#[derive(Debug, Clone)]
pub struct LibraryEntry {
    name: String,
    spectrum: Spectrum,
    /// Region-wise continuum-removed ratio of `spectrum`.
    prepared: Spectrum,
    regions: Vec<SegmentWindow>,
    features: Vec<AbsorptionFeature>,
    weights: Vec<f64>,
}

impl LibraryEntry {
    /// Builds an entry by detecting absorption features on the endmember
    /// spectrum (continuum removed independently per region).
    pub fn build(
        name: impl Into<String>,
        spectrum: Spectrum,
        regions: &[SegmentWindow],
        detect: &DetectParams,
    ) -> Result<Self> {
        let crs = continuum_remove_regions(&spectrum, regions)?;
        let min_width = detect
            .min_width_nm
            .unwrap_or_else(|| crate::absorption::default_min_width_nm(spectrum.grid()));
        let features = detect_features(&crs, detect.min_depth, min_width);
        if features.is_empty() {
            return Err(Error::NoFeatures);
        }
        let weights = compute_weights(&features)?;
        Ok(Self {
            name: name.into(),
            prepared: crs.ratio_spectrum(),
            spectrum,
            regions: regions.to_vec(),
            features,
            weights,
        })
    }

    /// Builds an entry from precomputed features and weights (e.g. loaded
    /// from a segments file, or hand-specified windows).
    pub fn with_features(
        name: impl Into<String>,
        spectrum: Spectrum,
        regions: &[SegmentWindow],
        features: Vec<AbsorptionFeature>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::NoFeatures);
        }
        if features.len() != weights.len() {
            return Err(Error::Config(format!(
                "{} features but {} weights",
                features.len(),
                weights.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::Config(format!(
                "weights must be positive and sum to 1, got sum {total}"
            )));
        }
        let crs = continuum_remove_regions(&spectrum, regions)?;
        Ok(Self {
            name: name.into(),
            prepared: crs.ratio_spectrum(),
            spectrum,
            regions: regions.to_vec(),
            features,
            weights,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn regions(&self) -> &[SegmentWindow] {
        &self.regions
    }

    pub fn features(&self) -> &[AbsorptionFeature] {
        &self.features
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Per-segment breakdown and weighted matching index for one library entry.
#[derive(Debug, Clone)]
pub struct MatchResult {
    pub entry_name: String,
    /// Segment windows, aligned with the per-segment vectors below.
    pub windows: Vec<SegmentWindow>,
    /// Post-clamp segment correlations; 0 where a segment carried no
    /// information.
    pub segment_correlations: Vec<f64>,
    pub weights: Vec<f64>,
    /// Set per segment when extraction failed or the segment was flat.
    pub flat_flags: Vec<bool>,
    /// Weighted sum of the post-clamp segment correlations.
    pub index: f64,
    /// Number of segments that produced an informative correlation.
    pub valid_segments: usize,
    /// False when fewer than the configured minimum of segments succeeded.
    pub valid: bool,
}

/// A test spectrum aligned to a library grid and preprocessed once for all
/// entries.
#[derive(Debug, Clone)]
pub struct PreparedTest {
    raw: Spectrum,
    ratio: Spectrum,
}

impl PreparedTest {
    /// Aligns `test` onto `grid` and removes its continuum per region.
    ///
    /// Channels of `grid` outside the test spectrum's wavelength range are
    /// masked (the grids only need to overlap). Non-positive reflectance is
    /// excluded from the ratio side (continuum removal is lenient) but kept
    /// in the raw side untouched.
    pub fn new(
        test: &Spectrum,
        grid: &Arc<WavelengthGrid>,
        regions: &[SegmentWindow],
        max_gap: usize,
    ) -> Result<Self> {
        let raw = align_to_grid(test, grid, max_gap)?;
        let ratio = continuum_remove_regions(&raw, regions)?.ratio_spectrum();
        Ok(Self { raw, ratio })
    }

    pub fn raw(&self) -> &Spectrum {
        &self.raw
    }

    pub fn ratio(&self) -> &Spectrum {
        &self.ratio
    }
}

/// Resamples `test` onto `grid`, masking grid channels outside the test
/// range instead of failing. Errors only when the ranges do not overlap.
pub fn align_to_grid(
    test: &Spectrum,
    grid: &Arc<WavelengthGrid>,
    max_gap: usize,
) -> Result<Spectrum> {
    if test.grid().wavelengths() == grid.wavelengths() {
        return if Arc::ptr_eq(test.grid_arc(), grid) {
            Ok(test.clone())
        } else {
            Spectrum::new(Arc::clone(grid), test.values().to_vec(), test.mask().to_vec())
        };
    }
    let (lo, hi) = (test.grid().min_nm(), test.grid().max_nm());
    let inside = grid.range_indices(lo, hi);
    if inside.len() < 2 {
        return Err(Error::OutOfRange(format!(
            "test range [{lo}, {hi}] nm does not overlap the library grid [{}, {}] nm",
            grid.min_nm(),
            grid.max_nm()
        )));
    }
    let sub = WavelengthGrid::new(grid.wavelengths()[inside.clone()].to_vec())?;
    let resampled = resample_with_max_gap(test, Arc::new(sub), max_gap)?;
    let mut values = vec![f64::NAN; grid.len()];
    let mut mask = vec![false; grid.len()];
    for (k, i) in inside.enumerate() {
        values[i] = resampled.values()[k];
        mask[i] = resampled.mask()[k];
    }
    Spectrum::new(Arc::clone(grid), values, mask)
}

fn score_prepared(
    entry: &LibraryEntry,
    prepared: &PreparedTest,
    config: &MatchConfig,
) -> MatchResult {
    let (lib_side, test_side) = if config.raw_reflectance {
        (&entry.spectrum, prepared.raw())
    } else {
        (&entry.prepared, prepared.ratio())
    };
    let n = entry.features.len();
    let mut correlations = Vec::with_capacity(n);
    let mut flats = Vec::with_capacity(n);
    let mut windows = Vec::with_capacity(n);
    let mut valid_segments = 0;
    for feature in &entry.features {
        windows.push(feature.window);
        let c = match extract_segment(lib_side, test_side, &feature.window) {
            Err(_) => None,
            Ok(seg) => match config.correlation_kind {
                CorrelationKind::Pearson => {
                    let c = pearson_index(&seg);
                    (!c.flat).then_some(c.value)
                }
                CorrelationKind::Clark => clark_index(&seg).ok(),
            },
        };
        match c {
            Some(value) => {
                valid_segments += 1;
                let clamped = if config.clamp_negative {
                    value.max(0.0)
                } else {
                    value
                };
                correlations.push(clamped);
                flats.push(false);
            }
            None => {
                correlations.push(0.0);
                flats.push(true);
            }
        }
    }
    let index: f64 = correlations
        .iter()
        .zip(&entry.weights)
        .map(|(c, w)| c * w)
        .sum();
    MatchResult {
        entry_name: entry.name.clone(),
        windows,
        segment_correlations: correlations,
        weights: entry.weights.clone(),
        flat_flags: flats,
        index,
        valid_segments,
        valid: valid_segments >= config.min_valid_segments,
    }
}

/// Matches one test spectrum against one library entry.
///
/// The test spectrum is aligned to the entry's grid and preprocessed
/// (continuum removed per region) internally. For matching many entries on
/// a shared grid, build a [`SpectralLibrary`] so preprocessing happens once.
pub fn matching_index(
    entry: &LibraryEntry,
    test: &Spectrum,
    config: &MatchConfig,
) -> Result<MatchResult> {
    let prepared = PreparedTest::new(test, entry.spectrum.grid_arc(), &entry.regions, config.max_gap)?;
    Ok(score_prepared(entry, &prepared, config))
}

/// Classification outcome: index of the winning entry (None when
/// unclassified) plus every per-entry result.
#[derive(Debug, Clone)]
pub struct Classification {
    pub best: Option<usize>,
    pub results: Vec<MatchResult>,
}

impl Classification {
    pub fn label(&self) -> Option<&str> {
        self.best.map(|i| self.results[i].entry_name.as_str())
    }

    pub fn best_index(&self) -> Option<f64> {
        self.best.map(|i| self.results[i].index)
    }
}

/// A set of library entries sharing one grid and one region configuration.
#[derive(Debug, Clone)]
pub struct SpectralLibrary {
    grid: Arc<WavelengthGrid>,
    regions: Vec<SegmentWindow>,
    entries: Vec<LibraryEntry>,
}

/// Library construction output: the usable library plus entries that were
/// skipped (no detectable features, degenerate spectra) with the cause.
pub struct LibraryBuild {
    pub library: SpectralLibrary,
    pub skipped: Vec<(String, Error)>,
}

impl SpectralLibrary {
    /// Builds entries from named spectra, skipping ones without detectable
    /// features. All spectra must share a grid.
    pub fn build(
        named: Vec<(String, Spectrum)>,
        regions: Vec<SegmentWindow>,
        detect: &DetectParams,
    ) -> Result<LibraryBuild> {
        if named.is_empty() {
            return Err(Error::Config("library has no entries".into()));
        }
        let grid = Arc::clone(named[0].1.grid_arc());
        let mut entries = Vec::new();
        let mut skipped = Vec::new();
        for (name, spectrum) in named {
            if spectrum.grid().wavelengths() != grid.wavelengths() {
                return Err(Error::GridMismatch(format!(
                    "library entry '{name}' is on a different grid"
                )));
            }
            match LibraryEntry::build(name.clone(), spectrum, &regions, detect) {
                Ok(e) => entries.push(e),
                Err(e) => skipped.push((name, e)),
            }
        }
        if entries.is_empty() {
            return Err(Error::Config(
                "no library entry has detectable absorption features".into(),
            ));
        }
        Ok(LibraryBuild {
            library: SpectralLibrary {
                grid,
                regions,
                entries,
            },
            skipped,
        })
    }

    /// Assembles a library from prebuilt entries (all on one grid).
    pub fn from_entries(entries: Vec<LibraryEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Config("library has no entries".into()));
        }
        let grid = Arc::clone(entries[0].spectrum.grid_arc());
        let regions = entries[0].regions.clone();
        for e in &entries[1..] {
            if e.spectrum.grid().wavelengths() != grid.wavelengths() {
                return Err(Error::GridMismatch(format!(
                    "library entry '{}' is on a different grid",
                    e.name
                )));
            }
        }
        Ok(Self {
            grid,
            regions,
            entries,
        })
    }

    pub fn grid(&self) -> &Arc<WavelengthGrid> {
        &self.grid
    }

    pub fn regions(&self) -> &[SegmentWindow] {
        &self.regions
    }

    pub fn entries(&self) -> &[LibraryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Preprocesses a test spectrum once for matching against every entry.
    pub fn prepare(&self, test: &Spectrum, config: &MatchConfig) -> Result<PreparedTest> {
        PreparedTest::new(test, &self.grid, &self.regions, config.max_gap)
    }

    /// Matching results for every entry, in library order.
    pub fn match_all(&self, test: &Spectrum, config: &MatchConfig) -> Result<Vec<MatchResult>> {
        let prepared = self.prepare(test, config)?;
        Ok(self
            .entries
            .iter()
            .map(|e| score_prepared(e, &prepared, config))
            .collect())
    }

    /// Classifies a test spectrum: argmax of the matching index over valid
    /// results, ties broken toward the lowest library index. Returns
    /// unclassified (best = None) when no result is valid or the best index
    /// falls below `threshold`.
    pub fn classify(
        &self,
        test: &Spectrum,
        config: &MatchConfig,
        threshold: f64,
    ) -> Result<Classification> {
        let results = self.match_all(test, config)?;
        Ok(pick_best(results, threshold))
    }

    /// Baseline scores of `test` against every entry over the full common
    /// unmasked grid; None for entries the baseline is undefined on.
    pub fn baseline_scores(
        &self,
        test: &Spectrum,
        method: BaselineMethod,
        max_gap: usize,
    ) -> Result<Vec<Option<f64>>> {
        let aligned = align_to_grid(test, &self.grid, max_gap)?;
        Ok(self
            .entries
            .iter()
            .map(|e| match method {
                BaselineMethod::Cosine => cosine_similarity(&e.spectrum, &aligned).ok(),
                BaselineMethod::FullPearson => full_pearson(&e.spectrum, &aligned).ok(),
            })
            .collect())
    }

    /// Argmax classification by a full-spectrum baseline.
    pub fn classify_baseline(
        &self,
        test: &Spectrum,
        method: BaselineMethod,
        max_gap: usize,
    ) -> Result<Option<(usize, f64)>> {
        let scores = self.baseline_scores(test, method, max_gap)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in scores.iter().enumerate() {
            if let Some(v) = s {
                if best.is_none_or(|(_, bv)| *v > bv) {
                    best = Some((i, *v));
                }
            }
        }
        Ok(best)
    }
}

fn pick_best(results: Vec<MatchResult>, threshold: f64) -> Classification {
    let mut best: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        if !r.valid {
            continue;
        }
        if best.is_none_or(|b| r.index > results[b].index) {
            best = Some(i);
        }
    }
    if let Some(b) = best {
        if results[b].index < threshold {
            best = None;
        }
    }
    Classification { best, results }
}

/// Full-spectrum baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineMethod {
    Cosine,
    FullPearson,
}

/// Cosine similarity over the channels unmasked in both spectra.
pub fn cosine_similarity(library: &Spectrum, test: &Spectrum) -> Result<f64> {
    if !library.same_grid(test) {
        return Err(Error::GridMismatch(
            "cosine similarity needs both spectra on one grid".into(),
        ));
    }
    let mut dot = 0.0;
    let mut nl = 0.0;
    let mut nt = 0.0;
    let mut n = 0usize;
    for i in 0..library.len() {
        if library.is_usable(i) && test.is_usable(i) {
            let l = library.values()[i];
            let t = test.values()[i];
            dot += l * t;
            nl += l * l;
            nt += t * t;
            n += 1;
        }
    }
    if n < 3 {
        return Err(Error::SegmentTooSmall(format!(
            "cosine similarity needs 3 common unmasked channels, got {n}"
        )));
    }
    if nl == 0.0 || nt == 0.0 {
        return Err(Error::DegenerateInput(
            "cosine similarity of a zero-norm spectrum".into(),
        ));
    }
    Ok((dot / (nl.sqrt() * nt.sqrt())).clamp(-1.0, 1.0))
}

/// Whole-domain correlation baseline: the Pearson index of the single
/// segment spanning the full common unmasked grid. Flat spectra yield 0.
pub fn full_pearson(library: &Spectrum, test: &Spectrum) -> Result<f64> {
    let window = SegmentWindow::covering(library.grid());
    let seg = extract_segment(library, test, &window)?;
    Ok(pearson_index(&seg).value)
}

//! Pipeline entry points behind the CLI subcommands. Each function does the
//! work and returns a summary; printing is left to the caller.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io::{
    read_library, read_segments, write_class_map, write_segments, Cube, ClassificationMap,
    SegmentsFile,
};
use crate::matching::{
    align_to_grid, BaselineMethod, DetectParams, LibraryEntry, MatchConfig, MatchResult,
    SpectralLibrary,
};
use crate::spectral::{SegmentWindow, Spectrum};
use crate::synth::{evaluate_scenario, find_scenario, EvalOutcome, TestSetParams};

/// Optional JSON configuration file mirroring the common CLI flags.
/// Explicit flags take precedence over file values.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub library: Option<PathBuf>,
    pub cube: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub spectrum: Option<PathBuf>,
    pub segments: Option<PathBuf>,
    pub correlation: Option<String>,
    pub clamp: Option<bool>,
    pub raw_reflectance: Option<bool>,
    pub threshold: Option<f64>,
    pub min_depth: Option<f64>,
    pub min_width_nm: Option<f64>,
    pub min_valid_segments: Option<usize>,
    pub max_gap: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub baselines: Option<bool>,
    pub seed: Option<u64>,
    pub scenario: Option<String>,
    pub count: Option<usize>,
    pub snr_db: Option<f64>,
    pub regions: Option<Vec<(f64, f64)>>,
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("config file: {e}")))
}

fn region_windows(regions: &[(f64, f64)]) -> Result<Vec<SegmentWindow>> {
    regions
        .iter()
        .map(|&(lo, hi)| SegmentWindow::new(lo, hi))
        .collect()
}

/// Builds a library from a CSV plus either feature detection or a
/// precomputed segments file. Returns the library and per-entry warnings.
fn build_library(
    library_path: &Path,
    regions: &[SegmentWindow],
    detect: &DetectParams,
    segments: Option<&SegmentsFile>,
) -> Result<(SpectralLibrary, Vec<String>)> {
    let named = read_library(library_path)?;
    let mut warnings = Vec::new();
    match segments {
        None => {
            let build = SpectralLibrary::build(named, regions.to_vec(), detect)?;
            for (name, err) in &build.skipped {
                warnings.push(format!("entry '{name}' skipped: {err}"));
            }
            Ok((build.library, warnings))
        }
        Some(file) => {
            let regions = if regions.is_empty() {
                file.region_windows()?
            } else {
                regions.to_vec()
            };
            let mut entries = Vec::new();
            for (name, spectrum) in named {
                let Some(seg) = file.entry(&name) else {
                    warnings.push(format!("entry '{name}' not in segments file; skipped"));
                    continue;
                };
                let features = seg
                    .features
                    .iter()
                    .map(|f| f.to_feature())
                    .collect::<Result<Vec<_>>>()?;
                match LibraryEntry::with_features(
                    name.clone(),
                    spectrum,
                    &regions,
                    features,
                    seg.weights.clone(),
                ) {
                    Ok(e) => entries.push(e),
                    Err(e) => warnings.push(format!("entry '{name}' skipped: {e}")),
                }
            }
            Ok((SpectralLibrary::from_entries(entries)?, warnings))
        }
    }
}

// ---------------------------------------------------------------------------
// extract-segments

#[derive(Debug, Clone)]
pub struct ExtractParams {
    pub library: PathBuf,
    pub regions: Vec<(f64, f64)>,
    pub min_depth: f64,
    pub min_width_nm: Option<f64>,
    pub out_prefix: PathBuf,
}

#[derive(Debug)]
pub struct ExtractSummary {
    pub entries: usize,
    pub features: usize,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// Detects absorption features per library entry and writes a feature
/// report CSV plus a reusable segments file.
pub fn cmd_extract_segments(params: &ExtractParams) -> Result<ExtractSummary> {
    let regions = region_windows(&params.regions)?;
    let detect = DetectParams {
        min_depth: params.min_depth,
        min_width_nm: params.min_width_nm,
    };
    let (library, warnings) = build_library(&params.library, &regions, &detect, None)?;

    let prefix = prefix_str(&params.out_prefix)?;
    let csv_path = PathBuf::from(format!("{prefix}_features.csv"));
    let mut f = File::create(&csv_path)?;
    writeln!(
        f,
        "entry,window_lo_nm,window_hi_nm,minimum_nm,depth,fwhm_nm,weight"
    )?;
    let mut features = 0;
    for entry in library.entries() {
        for (feat, weight) in entry.features().iter().zip(entry.weights()) {
            writeln!(
                f,
                "{},{},{},{},{},{},{}",
                entry.name(),
                feat.window.lo_nm,
                feat.window.hi_nm,
                feat.minimum_nm,
                feat.depth,
                feat.fwhm_nm,
                weight
            )?;
            features += 1;
        }
    }
    let segments_path = PathBuf::from(format!("{prefix}_segments.json"));
    write_segments(&segments_path, &SegmentsFile::from_library(&library))?;
    Ok(ExtractSummary {
        entries: library.len(),
        features,
        warnings,
        files: vec![csv_path, segments_path],
    })
}

// ---------------------------------------------------------------------------
// match

#[derive(Debug, Clone)]
pub struct MatchParams {
    pub library: PathBuf,
    pub spectrum: PathBuf,
    pub segments: Option<PathBuf>,
    pub regions: Vec<(f64, f64)>,
    pub min_depth: f64,
    pub min_width_nm: Option<f64>,
    pub config: MatchConfig,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct MatchReport {
    /// Results sorted by matching index descending, invalid results last.
    pub ranked: Vec<MatchResult>,
    pub warnings: Vec<String>,
    pub spectrum_name: String,
}

impl MatchReport {
    /// Long-format CSV: one row per entry segment, entries in rank order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "rank,entry,index,valid,segment,window_lo_nm,window_hi_nm,weight,correlation,flat\n",
        );
        for (rank, r) in self.ranked.iter().enumerate() {
            for (k, w) in r.windows.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    rank + 1,
                    r.entry_name,
                    r.index,
                    r.valid,
                    k,
                    w.lo_nm,
                    w.hi_nm,
                    r.weights[k],
                    r.segment_correlations[k],
                    r.flat_flags[k]
                ));
            }
        }
        s
    }
}

/// Matches one test spectrum against every library entry.
pub fn cmd_match(params: &MatchParams) -> Result<MatchReport> {
    let regions = region_windows(&params.regions)?;
    let detect = DetectParams {
        min_depth: params.min_depth,
        min_width_nm: params.min_width_nm,
    };
    let segments = params
        .segments
        .as_deref()
        .map(read_segments)
        .transpose()?;
    let (library, warnings) =
        build_library(&params.library, &regions, &detect, segments.as_ref())?;

    let mut test_entries = read_library(&params.spectrum)?;
    if test_entries.len() != 1 {
        return Err(Error::Config(format!(
            "'{}' holds {} spectra; the match command needs a single-spectrum file",
            params.spectrum.display(),
            test_entries.len()
        )));
    }
    let (spectrum_name, test) = test_entries.remove(0);

    let mut ranked = library.match_all(&test, &params.config)?;
    ranked.sort_by(|a, b| {
        b.valid
            .cmp(&a.valid)
            .then(b.index.total_cmp(&a.index))
    });
    let report = MatchReport {
        ranked,
        warnings,
        spectrum_name,
    };
    if let Some(out) = &params.out {
        let path = PathBuf::from(format!("{}_match.csv", prefix_str(out)?));
        fs::write(path, report.to_csv())?;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// classify-cube

#[derive(Debug, Clone)]
pub struct ClassifyCubeParams {
    pub cube_header: PathBuf,
    pub cube_data: Option<PathBuf>,
    pub library: PathBuf,
    pub segments: Option<PathBuf>,
    pub min_depth: f64,
    pub min_width_nm: Option<f64>,
    pub config: MatchConfig,
    pub threshold: f64,
    /// Worker count; 0 picks the number of cores.
    pub threads: usize,
    pub out_prefix: PathBuf,
    pub baselines: bool,
    /// Stripe memory budget; classification never holds more cube data than
    /// one stripe.
    pub stripe_budget_bytes: usize,
}

impl ClassifyCubeParams {
    pub const DEFAULT_STRIPE_BUDGET: usize = 16 << 20;
}

#[derive(Debug)]
pub struct ClassifySummary {
    pub rows: usize,
    pub cols: usize,
    pub classified: usize,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

struct PixelOutcome {
    wssc: Option<(u32, f64)>,
    cosine: Option<(u32, f64)>,
    pearson: Option<(u32, f64)>,
}

/// Classifies every pixel of a cube, writing a label map and per-class
/// score images; optionally the cosine and full-correlation baseline maps.
///
/// Pixels are processed stripe by stripe and assigned to workers by index;
/// results land in preallocated positions, so output is byte-identical for
/// any worker count.
pub fn cmd_classify_cube(params: &ClassifyCubeParams) -> Result<ClassifySummary> {
    let cube = match &params.cube_data {
        Some(data) => Cube::open_with(&params.cube_header, data)?,
        None => Cube::open(&params.cube_header)?,
    };
    let regions = cube.header().region_windows()?;
    let detect = DetectParams {
        min_depth: params.min_depth,
        min_width_nm: params.min_width_nm,
    };
    let segments = params
        .segments
        .as_deref()
        .map(read_segments)
        .transpose()?;
    let (library, mut warnings) =
        build_library(&params.library, &regions, &detect, segments.as_ref())?;

    // Re-align library entries onto the cube grid when the grids differ.
    let library = if library.grid().wavelengths() == cube.grid().wavelengths() {
        library
    } else {
        warnings.push("library resampled onto the cube grid".into());
        let entries = library
            .entries()
            .iter()
            .map(|e| {
                let aligned = align_to_grid(e.spectrum(), cube.grid(), params.config.max_gap)?;
                LibraryEntry::with_features(
                    e.name(),
                    aligned,
                    &regions,
                    e.features().to_vec(),
                    e.weights().to_vec(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        SpectralLibrary::from_entries(entries)?
    };

    let rows = cube.header().rows;
    let cols = cube.header().cols;
    let config = &params.config;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut outcomes: Vec<PixelOutcome> = Vec::with_capacity(rows * cols);
    let stripe_rows = cube.stripe_rows_for_budget(params.stripe_budget_bytes);
    let mut row = 0;
    while row < rows {
        let nrows = stripe_rows.min(rows - row);
        let stripe = cube.read_stripe(row, nrows)?;
        let mut stripe_outcomes: Vec<PixelOutcome> = Vec::new();
        pool.install(|| {
            (0..nrows * cols)
                .into_par_iter()
                .map(|k| {
                    let (r, c) = (row + k / cols, k % cols);
                    let spectrum = match cube.stripe_spectrum(&stripe, r, c) {
                        Ok(s) => s,
                        Err(_) => {
                            return PixelOutcome {
                                wssc: None,
                                cosine: None,
                                pearson: None,
                            }
                        }
                    };
                    classify_pixel(&library, &spectrum, config, params.threshold, params.baselines)
                })
                .collect_into_vec(&mut stripe_outcomes);
        });
        outcomes.append(&mut stripe_outcomes);
        row += nrows;
    }

    let range = config.index_range();
    let names: Vec<&str> = library.entries().iter().map(|e| e.name()).collect();
    let mut wssc_map = ClassificationMap::new(rows, cols, range);
    let mut cosine_map = ClassificationMap::new(rows, cols, (-1.0, 1.0));
    let mut pearson_map = ClassificationMap::new(rows, cols, (-1.0, 1.0));
    let mut classified = 0usize;
    for (k, o) in outcomes.iter().enumerate() {
        let (r, c) = (k / cols, k % cols);
        if let Some((id, score)) = o.wssc {
            wssc_map.set_pixel(r, c, Some(names[id as usize]), score);
            classified += 1;
        } else {
            wssc_map.set_pixel(r, c, None, 0.0);
        }
        if params.baselines {
            match o.cosine {
                Some((id, score)) => cosine_map.set_pixel(r, c, Some(names[id as usize]), score),
                None => cosine_map.set_pixel(r, c, None, 0.0),
            }
            match o.pearson {
                Some((id, score)) => pearson_map.set_pixel(r, c, Some(names[id as usize]), score),
                None => pearson_map.set_pixel(r, c, None, 0.0),
            }
        }
    }

    let prefix = prefix_str(&params.out_prefix)?;
    let mut files = write_class_map(&wssc_map, &params.out_prefix)?;
    if params.baselines {
        files.extend(write_class_map(
            &cosine_map,
            Path::new(&format!("{prefix}_cosine")),
        )?);
        files.extend(write_class_map(
            &pearson_map,
            Path::new(&format!("{prefix}_fullpearson")),
        )?);
    }
    Ok(ClassifySummary {
        rows,
        cols,
        classified,
        warnings,
        files,
    })
}

fn classify_pixel(
    library: &SpectralLibrary,
    spectrum: &Spectrum,
    config: &MatchConfig,
    threshold: f64,
    baselines: bool,
) -> PixelOutcome {
    let wssc = library
        .classify(spectrum, config, threshold)
        .ok()
        .and_then(|c| c.best.map(|i| (i as u32, c.results[i].index)));
    let (cosine, pearson) = if baselines {
        (
            library
                .classify_baseline(spectrum, BaselineMethod::Cosine, config.max_gap)
                .ok()
                .flatten()
                .map(|(i, s)| (i as u32, s)),
            library
                .classify_baseline(spectrum, BaselineMethod::FullPearson, config.max_gap)
                .ok()
                .flatten()
                .map(|(i, s)| (i as u32, s)),
        )
    } else {
        (None, None)
    };
    PixelOutcome {
        wssc,
        cosine,
        pearson,
    }
}

// ---------------------------------------------------------------------------
// synth-eval

#[derive(Debug, Clone)]
pub struct SynthEvalParams {
    pub scenario: String,
    pub seed: u64,
    pub count: usize,
    pub snr_db: f64,
    pub dominant_fraction: f64,
    pub pure: bool,
    pub config: MatchConfig,
    pub out_prefix: Option<PathBuf>,
}

/// Runs the synthetic benchmark and optionally writes metric and confusion
/// CSVs.
pub fn cmd_synth_eval(params: &SynthEvalParams) -> Result<EvalOutcome> {
    let scenario = find_scenario(&params.scenario)?;
    let test_params = TestSetParams {
        count: params.count,
        dominant_fraction: params.dominant_fraction,
        snr_db: params.snr_db,
        pure: params.pure,
    };
    let outcome = evaluate_scenario(scenario, &test_params, params.seed, &params.config)?;
    if let Some(out) = &params.out_prefix {
        let prefix = prefix_str(out)?;
        let mut metrics = String::from("method,accuracy\n");
        for m in &outcome.methods {
            metrics.push_str(&format!("{},{}\n", m.method, m.accuracy));
        }
        fs::write(format!("{prefix}_metrics.csv"), metrics)?;
        for m in &outcome.methods {
            let mut csv = String::from("true_class");
            for name in &outcome.class_names {
                csv.push_str(&format!(",{name}"));
            }
            csv.push_str(",unclassified\n");
            for (i, row) in m.confusion.iter().enumerate() {
                csv.push_str(&outcome.class_names[i]);
                for v in row {
                    csv.push_str(&format!(",{v}"));
                }
                csv.push('\n');
            }
            fs::write(
                format!("{prefix}_confusion_{}.csv", m.method.replace('-', "_")),
                csv,
            )?;
        }
    }
    Ok(outcome)
}

fn prefix_str(path: &Path) -> Result<&str> {
    path.to_str()
        .ok_or_else(|| Error::Config("output prefix is not valid UTF-8".into()))
}

//! Thin command-line front end over the `wssc` library.
//!
//! Exit codes: 0 success, 2 usage error, 3 parse error (text inputs),
//! 4 format error (binary/structured inputs), 5 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wssc::commands::{
    cmd_classify_cube, cmd_extract_segments, cmd_match, cmd_synth_eval, load_run_config,
    ClassifyCubeParams, ExtractParams, MatchParams, RunConfig, SynthEvalParams,
};
use wssc::matching::{CorrelationKind, MatchConfig};
use wssc::spectral::DEFAULT_MAX_GAP;
use wssc::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_FORMAT: u8 = 4;
const EXIT_RUNTIME: u8 = 5;

#[derive(Parser)]
#[command(
    name = "wssc",
    about = "Identify materials in hyperspectral data by matching absorption segments \
             against a spectral library (weighted sum of segmented correlation)",
    long_about = None,
    after_help = "Exit codes: 0 success, 2 usage error, 3 parse error, 4 format error, \
                  5 runtime error.",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// JSON config file supplying defaults for the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Spectral library CSV (wavelength_nm,<name>,... columns).
    #[arg(long)]
    library: Option<PathBuf>,

    /// Segment correlation kernel.
    #[arg(long, value_parser = ["pearson", "clark"])]
    correlation: Option<String>,

    /// Clamp negative segment correlations to zero before summation.
    #[arg(long)]
    clamp: bool,

    /// Correlate raw reflectance instead of the continuum-removed ratio.
    #[arg(long)]
    raw_reflectance: bool,

    /// Classification threshold; below it a pixel is unclassified.
    /// Defaults to 0 (unclamped) or 0.5 (clamped).
    #[arg(long)]
    threshold: Option<f64>,

    /// Minimum band depth for feature detection.
    #[arg(long)]
    min_depth: Option<f64>,

    /// Minimum feature width (FWHM) in nanometers; defaults to twice the
    /// median channel spacing.
    #[arg(long)]
    min_width_nm: Option<f64>,

    /// Widest masked-channel gap (in source channels) resampling will
    /// interpolate across.
    #[arg(long)]
    max_gap: Option<usize>,

    /// Minimum number of informative segments for a valid match.
    #[arg(long)]
    min_valid_segments: Option<usize>,

    /// Processing regions as lo:hi nanometer pairs, e.g.
    /// "1340:1670,1680:2170". Empty means one region over the whole grid.
    #[arg(long, value_parser = parse_regions)]
    regions: Option<Vec<(f64, f64)>>,

    /// Output path prefix.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Detect absorption segments in a library and write the feature report
    /// and reusable segments file.
    ExtractSegments {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Match a single test spectrum against every library entry and print a
    /// ranked per-segment report.
    Match {
        /// Single-spectrum CSV (same format as a one-entry library file).
        spectrum: Option<PathBuf>,
        /// Reuse a segments file from extract-segments instead of
        /// re-detecting features.
        #[arg(long)]
        segments: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Classify every pixel of a cube and write label and score maps.
    ClassifyCube {
        /// Cube header (<name>.json with sibling <name>.raw).
        cube: Option<PathBuf>,
        /// Explicit payload path when it is not <header>.raw.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Reuse a segments file from extract-segments.
        #[arg(long)]
        segments: Option<PathBuf>,
        /// Worker count (0 = number of cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Also write cosine-similarity and full-correlation baseline maps.
        #[arg(long)]
        baselines: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate a synthetic benchmark and compare segmented matching with
    /// the full-spectrum baselines.
    SynthEval {
        /// Scenario name (see data/scenarios.json): "localized-features" or
        /// "broad-bowl".
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of test spectra.
        #[arg(long)]
        count: Option<usize>,
        /// Test-set SNR in dB ("inf" disables noise).
        #[arg(long)]
        snr_db: Option<f64>,
        /// Dominant-endmember fraction of each mixture.
        #[arg(long)]
        mix_fraction: Option<f64>,
        /// Emit pure endmember spectra (no mixing, no continuum jitter).
        #[arg(long)]
        pure: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn parse_regions(s: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let (lo, hi) = part
            .split_once(':')
            .ok_or_else(|| format!("region '{part}' is not lo:hi"))?;
        let lo: f64 = lo.trim().parse().map_err(|e| format!("region '{part}': {e}"))?;
        let hi: f64 = hi.trim().parse().map_err(|e| format!("region '{part}': {e}"))?;
        out.push((lo, hi));
    }
    Ok(out)
}

struct Merged {
    run: RunConfig,
    common: CommonOpts,
}

impl Merged {
    fn new(common: CommonOpts) -> Result<Self, Error> {
        let run = match &common.config {
            Some(path) => load_run_config(path)?,
            None => RunConfig::default(),
        };
        Ok(Self { run, common })
    }

    fn library(&self) -> Result<PathBuf, Error> {
        self.common
            .library
            .clone()
            .or_else(|| self.run.library.clone())
            .ok_or_else(|| Error::Config("missing --library".into()))
    }

    fn out(&self) -> Option<PathBuf> {
        self.common.out.clone().or_else(|| self.run.out.clone())
    }

    fn out_required(&self) -> Result<PathBuf, Error> {
        self.out().ok_or_else(|| Error::Config("missing --out".into()))
    }

    fn regions(&self) -> Vec<(f64, f64)> {
        self.common
            .regions
            .clone()
            .or_else(|| self.run.regions.clone())
            .unwrap_or_default()
    }

    fn min_depth(&self) -> f64 {
        self.common
            .min_depth
            .or(self.run.min_depth)
            .unwrap_or(wssc::absorption::DEFAULT_MIN_DEPTH)
    }

    fn min_width_nm(&self) -> Option<f64> {
        self.common.min_width_nm.or(self.run.min_width_nm)
    }

    fn match_config(&self) -> Result<MatchConfig, Error> {
        let kind = match self
            .common
            .correlation
            .clone()
            .or_else(|| self.run.correlation.clone())
            .as_deref()
        {
            None | Some("pearson") => CorrelationKind::Pearson,
            Some("clark") => CorrelationKind::Clark,
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown correlation kind '{other}' (expected pearson or clark)"
                )))
            }
        };
        Ok(MatchConfig {
            correlation_kind: kind,
            clamp_negative: self.common.clamp || self.run.clamp.unwrap_or(false),
            min_valid_segments: self
                .common
                .min_valid_segments
                .or(self.run.min_valid_segments)
                .unwrap_or(1),
            raw_reflectance: self.common.raw_reflectance
                || self.run.raw_reflectance.unwrap_or(false),
            max_gap: self
                .common
                .max_gap
                .or(self.run.max_gap)
                .unwrap_or(DEFAULT_MAX_GAP),
        })
    }

    fn threshold(&self, config: &MatchConfig) -> f64 {
        self.common
            .threshold
            .or(self.run.threshold)
            .unwrap_or_else(|| config.default_threshold())
    }
}

fn run() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::ExtractSegments { common } => {
            let m = Merged::new(common)?;
            let params = ExtractParams {
                library: m.library()?,
                regions: m.regions(),
                min_depth: m.min_depth(),
                min_width_nm: m.min_width_nm(),
                out_prefix: m.out_required()?,
            };
            let summary = cmd_extract_segments(&params)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "extracted {} features from {} entries",
                summary.features, summary.entries
            );
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Match {
            spectrum,
            segments,
            common,
        } => {
            let m = Merged::new(common)?;
            let config = m.match_config()?;
            let params = MatchParams {
                library: m.library()?,
                spectrum: spectrum
                    .or_else(|| m.run.spectrum.clone())
                    .ok_or_else(|| Error::Config("missing spectrum path".into()))?,
                segments: segments.or_else(|| m.run.segments.clone()),
                regions: m.regions(),
                min_depth: m.min_depth(),
                min_width_nm: m.min_width_nm(),
                config,
                out: m.out(),
            };
            let report = cmd_match(&params)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", report.to_csv());
            Ok(())
        }
        Command::ClassifyCube {
            cube,
            data,
            segments,
            threads,
            baselines,
            common,
        } => {
            let m = Merged::new(common)?;
            let config = m.match_config()?;
            let threshold = m.threshold(&config);
            let params = ClassifyCubeParams {
                cube_header: cube
                    .or_else(|| m.run.cube.clone())
                    .ok_or_else(|| Error::Config("missing cube header path".into()))?,
                cube_data: data.or_else(|| m.run.data.clone()),
                library: m.library()?,
                segments: segments.or_else(|| m.run.segments.clone()),
                min_depth: m.min_depth(),
                min_width_nm: m.min_width_nm(),
                config,
                threshold,
                threads: threads.or(m.run.threads).unwrap_or(0),
                out_prefix: m.out_required()?,
                baselines: baselines || m.run.baselines.unwrap_or(false),
                stripe_budget_bytes: ClassifyCubeParams::DEFAULT_STRIPE_BUDGET,
            };
            let summary = cmd_classify_cube(&params)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "classified {} of {} pixels",
                summary.classified,
                summary.rows * summary.cols
            );
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::SynthEval {
            scenario,
            seed,
            count,
            snr_db,
            mix_fraction,
            pure,
            common,
        } => {
            let m = Merged::new(common)?;
            let config = m.match_config()?;
            let params = SynthEvalParams {
                scenario: scenario
                    .or_else(|| m.run.scenario.clone())
                    .ok_or_else(|| Error::Config("missing --scenario".into()))?,
                seed: seed.or(m.run.seed).unwrap_or(42),
                count: count.or(m.run.count).unwrap_or(2000),
                snr_db: snr_db.or(m.run.snr_db).unwrap_or(30.0),
                dominant_fraction: mix_fraction.unwrap_or(0.7),
                pure,
                config,
                out_prefix: m.out(),
            };
            let outcome = cmd_synth_eval(&params)?;
            println!("scenario: {} ({} samples)", params.scenario, outcome.sample_count);
            println!("method,accuracy");
            for method in &outcome.methods {
                println!("{},{}", method.method, method.accuracy);
            }
            Ok(())
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => EXIT_PARSE,
        Error::Format(_) => EXIT_FORMAT,
        Error::Config(_) | Error::InvalidGrid(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

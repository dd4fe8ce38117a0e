//! Synthetic benchmark: deterministic Gaussian-absorption endmembers,
//! linear-mixture test sets with continuum jitter and channel noise, and a
//! three-way method comparison (segmented matching vs. the full-spectrum
//! baselines).
//!
//! Scenario parameters live in a versioned file embedded in the crate
//! (`data/scenarios.json`); the seed only drives test-set randomness, never
//! the endmember definitions.

use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::matching::{BaselineMethod, DetectParams, MatchConfig, SpectralLibrary};
use crate::spectral::{Spectrum, WavelengthGrid};

#[derive(Debug, Clone, Deserialize)]
pub struct GridSpec {
    pub start_nm: f64,
    pub stop_nm: f64,
    pub step_nm: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ContinuumSpec {
    /// Reflectance at mid-grid.
    pub base: f64,
    /// Linear slope per micrometer.
    pub slope_per_um: f64,
    /// Gentle concave dome amplitude (kept non-negative so the continuum
    /// stays on its own hull).
    pub bow: f64,
}

/// Per-spectrum multiplicative continuum perturbation ranges.
#[derive(Debug, Clone, Deserialize)]
pub struct JitterSpec {
    pub scale: f64,
    pub tilt: f64,
    pub bow: f64,
    /// Broad random undulations standing in for unmodeled background
    /// materials; locally near-linear at segment-window scale.
    #[serde(default)]
    pub undulations: Option<UndulationSpec>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct UndulationSpec {
    pub count: usize,
    pub amplitude: f64,
    pub sigma_lo_nm: f64,
    pub sigma_hi_nm: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FeatureSpec {
    pub center_nm: f64,
    pub sigma_nm: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EndmemberSpec {
    pub name: String,
    pub features: Vec<FeatureSpec>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub grid: GridSpec,
    pub continuum: ContinuumSpec,
    pub jitter: JitterSpec,
    /// Feature-detection depth threshold used when building the library.
    pub min_depth: f64,
    pub endmembers: Vec<EndmemberSpec>,
}

#[derive(Debug, Deserialize)]
pub struct ScenarioSet {
    pub version: u32,
    pub scenarios: Vec<Scenario>,
}

static SCENARIOS: OnceLock<ScenarioSet> = OnceLock::new();

/// The embedded, versioned scenario definitions.
pub fn scenario_set() -> &'static ScenarioSet {
    SCENARIOS.get_or_init(|| {
        serde_json::from_str(include_str!("../data/scenarios.json"))
            .expect("embedded scenarios.json is valid")
    })
}

pub fn scenario_names() -> Vec<&'static str> {
    scenario_set()
        .scenarios
        .iter()
        .map(|s| s.name.as_str())
        .collect()
}

pub fn find_scenario(name: &str) -> Result<&'static Scenario> {
    scenario_set()
        .scenarios
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown scenario '{name}'; known: {}",
                scenario_names().join(", ")
            ))
        })
}

impl Scenario {
    pub fn wavelength_grid(&self) -> Result<Arc<WavelengthGrid>> {
        Ok(Arc::new(WavelengthGrid::uniform(
            self.grid.start_nm,
            self.grid.stop_nm,
            self.grid.step_nm,
        )?))
    }

    fn continuum_at(&self, w: f64) -> f64 {
        let mid = (self.grid.start_nm + self.grid.stop_nm) / 2.0;
        let span = self.grid.stop_nm - self.grid.start_nm;
        let u = 2.0 * (w - mid) / span;
        self.continuum.base
            + self.continuum.slope_per_um * (w - mid) / 1000.0
            + self.continuum.bow * (1.0 - u * u)
    }

    fn endmember_values(&self, grid: &WavelengthGrid, spec: &EndmemberSpec) -> Vec<f64> {
        grid.wavelengths()
            .iter()
            .map(|&w| {
                let absorbed: f64 = spec
                    .features
                    .iter()
                    .map(|f| {
                        let d = (w - f.center_nm) / f.sigma_nm;
                        f.depth * (-0.5 * d * d).exp()
                    })
                    .sum();
                self.continuum_at(w) * (1.0 - absorbed)
            })
            .collect()
    }

    /// Noiseless endmember spectra, in scenario order.
    pub fn endmember_spectra(&self) -> Result<Vec<(String, Spectrum)>> {
        let grid = self.wavelength_grid()?;
        self.endmembers
            .iter()
            .map(|e| {
                let values = self.endmember_values(&grid, e);
                Ok((
                    e.name.clone(),
                    Spectrum::new(Arc::clone(&grid), values, vec![true; grid.len()])?,
                ))
            })
            .collect()
    }

    /// Library built from this scenario's endmembers.
    pub fn build_library(&self) -> Result<SpectralLibrary> {
        let build = SpectralLibrary::build(
            self.endmember_spectra()?,
            vec![],
            &DetectParams {
                min_depth: self.min_depth,
                min_width_nm: None,
            },
        )?;
        if !build.skipped.is_empty() {
            return Err(Error::Config(format!(
                "scenario endmember '{}' has no detectable features",
                build.skipped[0].0
            )));
        }
        Ok(build.library)
    }
}

/// Test-set generation parameters.
#[derive(Debug, Clone, Copy)]
pub struct TestSetParams {
    pub count: usize,
    /// Fraction of the dominant endmember in each mixture.
    pub dominant_fraction: f64,
    /// Channel noise level; `f64::INFINITY` disables noise. The noise
    /// standard deviation is `rms(clean) / 10^(snr_db/20)`.
    pub snr_db: f64,
    /// Emit exact endmember spectra: no mixing and no continuum jitter.
    pub pure: bool,
}

impl Default for TestSetParams {
    fn default() -> Self {
        Self {
            count: 2000,
            dominant_fraction: 0.7,
            snr_db: 30.0,
            pure: false,
        }
    }
}

/// One generated test spectrum with its ground-truth class.
#[derive(Debug, Clone)]
pub struct LabeledSpectrum {
    pub spectrum: Spectrum,
    pub true_class: usize,
}

/// Deterministic test set: same scenario, params and seed give the same
/// spectra bit for bit.
pub fn generate_test_set(
    scenario: &Scenario,
    params: &TestSetParams,
    seed: u64,
) -> Result<Vec<LabeledSpectrum>> {
    if !(params.dominant_fraction > 0.5 && params.dominant_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "dominant fraction must be in (0.5, 1], got {}",
            params.dominant_fraction
        )));
    }
    let grid = scenario.wavelength_grid()?;
    let endmembers: Vec<Vec<f64>> = scenario
        .endmembers
        .iter()
        .map(|e| scenario.endmember_values(&grid, e))
        .collect();
    let k = endmembers.len();
    if k < 2 {
        return Err(Error::Config("scenario needs at least 2 endmembers".into()));
    }
    let mid = (scenario.grid.start_nm + scenario.grid.stop_nm) / 2.0;
    let span = scenario.grid.stop_nm - scenario.grid.start_nm;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(params.count);
    for _ in 0..params.count {
        let dominant = rng.gen_range(0..k);
        let contaminant = (dominant + 1 + rng.gen_range(0..k - 1)) % k;
        let (scale, tilt, bow) = if params.pure {
            (1.0, 0.0, 0.0)
        } else {
            (
                1.0 + scenario.jitter.scale * rng.gen_range(-1.0..1.0),
                scenario.jitter.tilt * rng.gen_range(-1.0..1.0),
                scenario.jitter.bow * rng.gen_range(-1.0..1.0),
            )
        };
        let mut bumps: Vec<(f64, f64, f64)> = Vec::new();
        if !params.pure {
            if let Some(und) = &scenario.jitter.undulations {
                for _ in 0..und.count {
                    bumps.push((
                        rng.gen_range(scenario.grid.start_nm..scenario.grid.stop_nm),
                        rng.gen_range(und.sigma_lo_nm..und.sigma_hi_nm),
                        und.amplitude * rng.gen_range(-1.0..1.0),
                    ));
                }
            }
        }
        let f = if params.pure {
            1.0
        } else {
            params.dominant_fraction
        };
        let mut values: Vec<f64> = grid
            .wavelengths()
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let u = 2.0 * (w - mid) / span;
                let mut m = scale * (1.0 + tilt * u + bow * (u * u - 1.0 / 3.0));
                for &(c, s, a) in &bumps {
                    let d = (w - c) / s;
                    m *= 1.0 + a * (-0.5 * d * d).exp();
                }
                let clean = f * endmembers[dominant][i] + (1.0 - f) * endmembers[contaminant][i];
                m * clean
            })
            .collect();
        if params.snr_db.is_finite() {
            let rms = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
            let sigma = rms / 10f64.powf(params.snr_db / 20.0);
            let normal = Normal::new(0.0, sigma)
                .map_err(|e| Error::Config(format!("noise distribution: {e}")))?;
            for v in &mut values {
                *v += normal.sample(&mut rng);
            }
        }
        out.push(LabeledSpectrum {
            spectrum: Spectrum::new(Arc::clone(&grid), values, vec![true; grid.len()])?,
            true_class: dominant,
        });
    }
    Ok(out)
}

/// Per-method evaluation: accuracy and a confusion matrix with one row per
/// true class and one trailing column for unclassified predictions.
#[derive(Debug, Clone)]
pub struct MethodEval {
    pub method: String,
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
}

impl MethodEval {
    pub fn recall(&self, class: usize) -> f64 {
        let row = &self.confusion[class];
        let total: usize = row.iter().sum();
        if total == 0 {
            0.0
        } else {
            row[class] as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub class_names: Vec<String>,
    pub sample_count: usize,
    pub methods: Vec<MethodEval>,
}

impl EvalOutcome {
    pub fn method(&self, name: &str) -> Option<&MethodEval> {
        self.methods.iter().find(|m| m.method == name)
    }
}

/// Runs the full comparison: segmented matching plus both baselines over a
/// generated test set.
pub fn evaluate_scenario(
    scenario: &Scenario,
    params: &TestSetParams,
    seed: u64,
    config: &MatchConfig,
) -> Result<EvalOutcome> {
    let library = scenario.build_library()?;
    let class_names: Vec<String> = library
        .entries()
        .iter()
        .map(|e| e.name().to_string())
        .collect();
    let samples = generate_test_set(scenario, params, seed)?;
    let k = class_names.len();
    let mut confusion = vec![vec![vec![0usize; k + 1]; k]; 3];
    for sample in &samples {
        let wssc = library
            .classify(&sample.spectrum, config, f64::NEG_INFINITY)?
            .best;
        let cosine = library
            .classify_baseline(&sample.spectrum, BaselineMethod::Cosine, config.max_gap)?
            .map(|(i, _)| i);
        let pearson = library
            .classify_baseline(&sample.spectrum, BaselineMethod::FullPearson, config.max_gap)?
            .map(|(i, _)| i);
        for (m, pred) in [wssc, cosine, pearson].into_iter().enumerate() {
            let col = pred.unwrap_or(k);
            confusion[m][sample.true_class][col] += 1;
        }
    }
    let names = ["wssc", "cosine", "full-pearson"];
    let methods = names
        .iter()
        .zip(confusion)
        .map(|(name, conf)| {
            let correct: usize = (0..k).map(|i| conf[i][i]).sum();
            MethodEval {
                method: name.to_string(),
                accuracy: correct as f64 / samples.len() as f64,
                confusion: conf,
            }
        })
        .collect();
    Ok(EvalOutcome {
        class_names,
        sample_count: samples.len(),
        methods,
    })
}

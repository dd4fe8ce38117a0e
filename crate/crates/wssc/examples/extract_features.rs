//! Detect absorption features on a synthetic endmember and print the
//! measured band minima, depths, FWHMs and matching weights.
//!
//! ```bash
//! cargo run -p wssc --example extract_features
//! ```

use wssc::absorption::{compute_weights, continuum_remove, detect_features};
use wssc::spectral::{Spectrum, WavelengthGrid};

fn main() -> wssc::Result<()> {
    let planted = [
        (1250.0, 20.0, 0.30),
        (1550.0, 25.0, 0.18),
        (1900.0, 18.0, 0.40),
        (2200.0, 22.0, 0.24),
    ];
    let grid = WavelengthGrid::uniform(1000.0, 2500.0, 5.0)?;
    let values: Vec<f64> = grid
        .wavelengths()
        .iter()
        .map(|&w| {
            let absorbed: f64 = planted
                .iter()
                .map(|&(mu, sigma, depth): &(f64, f64, f64)| {
                    depth * (-0.5 * ((w - mu) / sigma).powi(2)).exp()
                })
                .sum();
            0.6 * (1.0 - absorbed)
        })
        .collect();
    let spectrum = Spectrum::unmasked(grid, values)?;

    let crs = continuum_remove(&spectrum)?;
    let features = detect_features(&crs, 0.05, 10.0);
    let weights = compute_weights(&features)?;

    println!("planted dips: {planted:?}");
    println!();
    println!(
        "{:>3} {:>9} {:>9} {:>11} {:>7} {:>9} {:>8}",
        "#", "lo_nm", "hi_nm", "minimum_nm", "depth", "fwhm_nm", "weight"
    );
    for (i, (f, w)) in features.iter().zip(&weights).enumerate() {
        println!(
            "{i:>3} {:>9.1} {:>9.1} {:>11.1} {:>7.3} {:>9.1} {:>8.3}",
            f.window.lo_nm, f.window.hi_nm, f.minimum_nm, f.depth, f.fwhm_nm, w
        );
    }
    println!();
    println!("Weights are FWHM x depth, normalized to sum to 1; broad deep bands");
    println!("carry the most evidence in the matching index.");
    Ok(())
}

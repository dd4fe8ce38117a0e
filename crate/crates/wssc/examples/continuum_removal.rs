//! Remove the convex-hull continuum from a synthetic reflectance spectrum
//! and print the fitted hull and the ratio next to the input.
//!
//! ```bash
//! cargo run -p wssc --example continuum_removal
//! ```

use wssc::absorption::continuum_remove;
use wssc::spectral::{Spectrum, WavelengthGrid};

fn main() -> wssc::Result<()> {
    // A sloped continuum with two absorption features.
    let grid = WavelengthGrid::uniform(1000.0, 2400.0, 50.0)?;
    let values: Vec<f64> = grid
        .wavelengths()
        .iter()
        .map(|&w| {
            let continuum = 0.65 - 0.00008 * (w - 1000.0);
            let dip1 = 0.35 * (-0.5 * ((w - 1400.0) / 80.0_f64).powi(2)).exp();
            let dip2 = 0.20 * (-0.5 * ((w - 2100.0) / 60.0_f64).powi(2)).exp();
            continuum * (1.0 - dip1 - dip2)
        })
        .collect();
    let spectrum = Spectrum::unmasked(grid, values)?;

    let crs = continuum_remove(&spectrum)?;

    println!("{:>10} {:>12} {:>12} {:>8}  hull contact", "nm", "reflectance", "continuum", "ratio");
    for (i, &w) in spectrum.grid().wavelengths().iter().enumerate() {
        let contact = if crs.ratio()[i] >= 1.0 - 1e-6 { "*" } else { "" };
        println!(
            "{w:>10.0} {:>12.4} {:>12.4} {:>8.4}  {contact}",
            spectrum.values()[i],
            crs.continuum()[i],
            crs.ratio()[i],
        );
    }
    println!();
    println!("The continuum is the upper convex hull of the points; dividing by it");
    println!("flattens the slope and isolates the two absorption features.");
    Ok(())
}

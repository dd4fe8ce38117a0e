//! Write a small synthetic cube plus a library to disk, classify every
//! pixel in parallel, and emit the label CSV, per-class PGM score images
//! and legend — including the full-spectrum baseline maps.
//!
//! ```bash
//! cargo run -p wssc --example classify_cube
//! ```

use std::fs;
use std::sync::Arc;

use wssc::commands::{cmd_classify_cube, ClassifyCubeParams};
use wssc::io::{write_cube, write_library, CubeHeader};
use wssc::matching::MatchConfig;
use wssc::spectral::{Spectrum, WavelengthGrid};

fn main() -> wssc::Result<()> {
    let dir = std::env::temp_dir().join("wssc-example-cube");
    fs::create_dir_all(&dir)?;

    let bands = 90;
    let grid = Arc::new(WavelengthGrid::uniform(1000.0, 1000.0 + 16.0 * (bands - 1) as f64, 16.0)?);
    let make = |dips: &[(f64, f64, f64)]| -> Spectrum {
        let values: Vec<f64> = grid
            .wavelengths()
            .iter()
            .map(|&w| {
                let a: f64 = dips
                    .iter()
                    .map(|&(mu, s, d)| d * (-0.5 * ((w - mu) / s).powi(2)).exp())
                    .sum();
                0.6 * (1.0 - a)
            })
            .collect();
        Spectrum::new(Arc::clone(&grid), values, vec![true; grid.len()]).unwrap()
    };
    let entries = vec![
        ("basalt_like".to_string(), make(&[(1250.0, 40.0, 0.3)])),
        ("clay_like".to_string(), make(&[(1750.0, 35.0, 0.35)])),
        ("salt_like".to_string(), make(&[(2150.0, 38.0, 0.28)])),
    ];
    let library_path = dir.join("library.csv");
    write_library(&library_path, &entries)?;

    // 24x24 cube painted in three vertical bands, mildly noisy.
    let (rows, cols) = (24, 24);
    let mut data = vec![0f32; rows * cols * bands];
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut noise = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state as f64 / u64::MAX as f64 - 0.5) * 0.02
    };
    for r in 0..rows {
        for c in 0..cols {
            let class = c * 3 / cols;
            for b in 0..bands {
                data[b * rows * cols + r * cols + c] =
                    (entries[class].1.values()[b] + noise()) as f32;
            }
        }
    }
    let header = CubeHeader::new(rows, cols, grid.wavelengths().to_vec(), vec![], vec![])?;
    let header_path = dir.join("scene.json");
    write_cube(&header, &data, &header_path)?;

    let summary = cmd_classify_cube(&ClassifyCubeParams {
        cube_header: header_path,
        cube_data: None,
        library: library_path,
        segments: None,
        min_depth: 0.05,
        min_width_nm: None,
        config: MatchConfig::default(),
        threshold: 0.5,
        threads: 0,
        out_prefix: dir.join("maps"),
        baselines: true,
        stripe_budget_bytes: ClassifyCubeParams::DEFAULT_STRIPE_BUDGET,
    })?;

    println!(
        "classified {} of {} pixels",
        summary.classified,
        summary.rows * summary.cols
    );
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    println!();
    println!("View the .pgm score images with any image viewer; the labels CSV");
    println!("holds row,col,label,score per pixel. The *_cosine and *_fullpearson");
    println!("prefixes are the full-spectrum baseline maps.");
    Ok(())
}

//! Tour of the file formats: spectral-library CSV (with masked cells),
//! cube header + raw BSQ payload, and the segments file. Verifies each
//! round trip on the way.
//!
//! ```bash
//! cargo run -p wssc --example library_io
//! ```

use std::fs;
use std::sync::Arc;

use wssc::io::{
    read_library, read_segments, write_cube, write_library, write_segments, Cube, CubeHeader,
    SegmentsFile,
};
use wssc::matching::{DetectParams, SpectralLibrary};
use wssc::spectral::{Spectrum, WavelengthGrid};

fn main() -> wssc::Result<()> {
    let dir = std::env::temp_dir().join("wssc-example-io");
    fs::create_dir_all(&dir)?;

    // --- Library CSV: one column per endmember, blank cells are masked.
    let grid = Arc::new(WavelengthGrid::uniform(1000.0, 2500.0, 10.0)?);
    let gypsum: Vec<f64> = grid
        .wavelengths()
        .iter()
        .map(|&w| 0.6 * (1.0 - 0.3 * (-0.5 * ((w - 1450.0) / 30.0_f64).powi(2)).exp()))
        .collect();
    let mut mask = vec![true; grid.len()];
    for (i, &w) in grid.wavelengths().iter().enumerate() {
        if (1340.0..=1400.0).contains(&w) {
            mask[i] = false; // pretend water-absorption channels
        }
    }
    let entries = vec![(
        "gypsum_like".to_string(),
        Spectrum::new(Arc::clone(&grid), gypsum, mask)?,
    )];
    let lib_path = dir.join("library.csv");
    write_library(&lib_path, &entries)?;
    let back = read_library(&lib_path)?;
    assert_eq!(back[0].1.unmasked_count(), entries[0].1.unmasked_count());
    println!("library.csv      round trip ok ({} channels, {} masked)",
        grid.len(), grid.len() - back[0].1.unmasked_count());

    // --- Cube: JSON header + little-endian float32 band-sequential payload.
    let header = CubeHeader::new(
        4,
        5,
        grid.wavelengths().to_vec(),
        vec![34, 35, 36],                       // bad bands by index
        vec![(1000.0, 1330.0), (1410.0, 2500.0)], // per-spectrometer regions
    )?;
    let data = vec![0.5f32; 4 * 5 * grid.len()];
    let cube_path = dir.join("scene.json");
    write_cube(&header, &data, &cube_path)?;
    let cube = Cube::open(&cube_path)?;
    let pixel = cube.pixel_spectrum(3, 2)?;
    println!(
        "scene.json/.raw  round trip ok ({} bands, {} usable per pixel)",
        cube.header().bands,
        pixel.unmasked_count()
    );

    // --- Segments file: reusable features + weights from a library.
    let library = SpectralLibrary::build(
        back,
        vec![],
        &DetectParams {
            min_depth: 0.05,
            min_width_nm: None,
        },
    )?
    .library;
    let seg_path = dir.join("segments.json");
    write_segments(&seg_path, &SegmentsFile::from_library(&library))?;
    let seg = read_segments(&seg_path)?;
    println!(
        "segments.json    round trip ok ({} entries, {} features total)",
        seg.entries.len(),
        seg.entries.iter().map(|e| e.features.len()).sum::<usize>()
    );

    println!();
    println!("files under {}", dir.display());
    Ok(())
}

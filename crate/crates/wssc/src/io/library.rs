//! Spectral-library CSV: header row `wavelength_nm,<name1>,<name2>,...`,
//! one row per channel, one column per endmember. Blank cells are masked
//! channels. UTF-8, `.` decimal separator, LF line endings.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{Spectrum, WavelengthGrid};

/// Reads a library file into named spectra sharing one grid.
pub fn read_library(path: &Path) -> Result<Vec<(String, Spectrum)>> {
    let text = fs::read_to_string(path)?;
    parse_library(&text)
}

/// Parses library CSV text; see [`read_library`].
pub fn parse_library(text: &str) -> Result<Vec<(String, Spectrum)>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 2 || columns[0].trim() != "wavelength_nm" {
        return Err(Error::Parse {
            line: 1,
            msg: format!(
                "header must be 'wavelength_nm,<name>,...', got '{}'",
                header.trim_end()
            ),
        });
    }
    let names: Vec<String> = columns[1..].iter().map(|s| s.trim().to_string()).collect();
    if let Some(empty) = names.iter().position(|n| n.is_empty()) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("endmember column {} has an empty name", empty + 2),
        });
    }

    let mut wavelengths: Vec<f64> = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut masks: Vec<Vec<bool>> = vec![Vec::new(); names.len()];
    for (idx, raw_line) in lines {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != names.len() + 1 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "expected {} cells, got {}",
                    names.len() + 1,
                    cells.len()
                ),
            });
        }
        let w: f64 = cells[0].trim().parse().map_err(|e| Error::Parse {
            line: line_no,
            msg: format!("bad wavelength '{}': {e}", cells[0]),
        })?;
        if let Some(&prev) = wavelengths.last() {
            if w <= prev {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("wavelengths must ascend: {prev} then {w}"),
                });
            }
        }
        wavelengths.push(w);
        for (k, cell) in cells[1..].iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                values[k].push(f64::NAN);
                masks[k].push(false);
            } else {
                let v: f64 = cell.parse().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("bad value '{cell}' in column '{}': {e}", names[k]),
                })?;
                values[k].push(v);
                masks[k].push(true);
            }
        }
    }

    let grid = Arc::new(WavelengthGrid::new(wavelengths).map_err(|e| Error::Parse {
        line: 1,
        msg: format!("wavelength column: {e}"),
    })?);
    let mut out = Vec::with_capacity(names.len());
    for ((name, v), m) in names.into_iter().zip(values).zip(masks) {
        out.push((name, Spectrum::new(Arc::clone(&grid), v, m)?));
    }
    Ok(out)
}

/// Writes named spectra (sharing one grid) as library CSV. Values print in
/// shortest round-trip form, so reading the file back reproduces them
/// bit-exactly.
pub fn write_library(path: &Path, entries: &[(String, Spectrum)]) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::Config("cannot write an empty library".into()));
    }
    let grid = entries[0].1.grid();
    for (name, s) in entries {
        if s.grid().wavelengths() != grid.wavelengths() {
            return Err(Error::GridMismatch(format!(
                "entry '{name}' is on a different grid"
            )));
        }
        if name.contains(',') || name.contains('\n') {
            return Err(Error::Config(format!(
                "entry name '{name}' contains CSV delimiters"
            )));
        }
    }
    let mut f = fs::File::create(path)?;
    write!(f, "wavelength_nm")?;
    for (name, _) in entries {
        write!(f, ",{name}")?;
    }
    writeln!(f)?;
    for (i, &w) in grid.wavelengths().iter().enumerate() {
        write!(f, "{w}")?;
        for (_, s) in entries {
            if s.is_usable(i) {
                write!(f, ",{}", s.values()[i])?;
            } else {
                write!(f, ",")?;
            }
        }
        writeln!(f)?;
    }
    Ok(())
}

//! Classification-map output: a labels CSV, one grayscale PGM score image
//! per class, and a legend file tying labels to images.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const UNCLASSIFIED: &str = "unclassified";

/// Per-pixel class labels and best matching scores for one scene.
#[derive(Debug, Clone)]
pub struct ClassificationMap {
    rows: usize,
    cols: usize,
    /// Interned class names, in first-seen order.
    class_names: Vec<String>,
    /// Per-pixel class id (row-major); None = unclassified.
    labels: Vec<Option<u32>>,
    scores: Vec<f64>,
    /// Matching-index range the scores live in; used to scale image
    /// intensities.
    score_range: (f64, f64),
}

impl ClassificationMap {
    pub fn new(rows: usize, cols: usize, score_range: (f64, f64)) -> Self {
        Self {
            rows,
            cols,
            class_names: Vec::new(),
            labels: vec![None; rows * cols],
            scores: vec![0.0; rows * cols],
            score_range,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn score_range(&self) -> (f64, f64) {
        self.score_range
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    fn intern(&mut self, name: &str) -> u32 {
        if let Some(i) = self.class_names.iter().position(|n| n == name) {
            return i as u32;
        }
        self.class_names.push(name.to_string());
        (self.class_names.len() - 1) as u32
    }

    pub fn set_pixel(&mut self, row: usize, col: usize, label: Option<&str>, score: f64) {
        let id = label.map(|l| self.intern(l));
        let k = row * self.cols + col;
        self.labels[k] = id;
        self.scores[k] = score;
    }

    pub fn label(&self, row: usize, col: usize) -> Option<&str> {
        self.labels[row * self.cols + col].map(|id| self.class_names[id as usize].as_str())
    }

    pub fn score(&self, row: usize, col: usize) -> f64 {
        self.scores[row * self.cols + col]
    }

    /// Fraction of pixels carrying a label.
    pub fn classified_fraction(&self) -> f64 {
        let n = self.labels.iter().filter(|l| l.is_some()).count();
        n as f64 / self.labels.len().max(1) as f64
    }
}

fn sanitize_for_filename(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `<prefix>_labels.csv`, one `<prefix>_<class>.pgm` per class, and
/// `<prefix>_legend.txt`. Returns the paths written.
///
/// In a class image, pixels labeled that class get intensity proportional
/// to their score scaled from the map's score range to 0..255; every other
/// pixel (including unclassified) is 0.
pub fn write_class_map(map: &ClassificationMap, prefix: &Path) -> Result<Vec<PathBuf>> {
    let prefix_str = prefix
        .to_str()
        .ok_or_else(|| Error::Config("output prefix is not valid UTF-8".into()))?;
    let mut written = Vec::new();

    let labels_path = PathBuf::from(format!("{prefix_str}_labels.csv"));
    {
        let mut f = File::create(&labels_path)?;
        writeln!(f, "row,col,label,score")?;
        for r in 0..map.rows {
            for c in 0..map.cols {
                let label = map.label(r, c).unwrap_or(UNCLASSIFIED);
                writeln!(f, "{r},{c},{label},{}", map.score(r, c))?;
            }
        }
    }
    written.push(labels_path);

    let (lo, hi) = map.score_range;
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let mut legend = String::new();
    for (id, name) in map.class_names.iter().enumerate() {
        let img_path = PathBuf::from(format!(
            "{prefix_str}_{}.pgm",
            sanitize_for_filename(name)
        ));
        let mut pixels = Vec::with_capacity(map.rows * map.cols);
        for k in 0..map.rows * map.cols {
            let v = if map.labels[k] == Some(id as u32) {
                let t = ((map.scores[k] - lo) / span).clamp(0.0, 1.0);
                (t * 255.0).round() as u8
            } else {
                0
            };
            pixels.push(v);
        }
        let mut f = File::create(&img_path)?;
        write!(f, "P5\n{} {}\n255\n", map.cols, map.rows)?;
        f.write_all(&pixels)?;
        legend.push_str(&format!(
            "{name} -> {}\n",
            img_path.file_name().unwrap().to_string_lossy()
        ));
        written.push(img_path);
    }
    legend.push_str(&format!(
        "{UNCLASSIFIED} -> intensity 0 in all class images\n"
    ));
    let legend_path = PathBuf::from(format!("{prefix_str}_legend.txt"));
    fs::write(&legend_path, legend)?;
    written.push(legend_path);
    Ok(written)
}

/// Reads a `<prefix>_labels.csv` back into a map. Dimensions come from the
/// highest row/col present; the score range defaults to the clamped index
/// range [0, 1] (the CSV does not carry it).
pub fn read_class_map_csv(path: &Path) -> Result<ClassificationMap> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    if header.trim_end() != "row,col,label,score" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header 'row,col,label,score', got '{header}'"),
        });
    }
    let mut records: Vec<(usize, usize, Option<String>, f64)> = Vec::new();
    let mut max_row = 0usize;
    let mut max_col = 0usize;
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 4 cells, got {}", cells.len()),
            });
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize> {
            s.trim().parse().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad {what} '{s}': {e}"),
            })
        };
        let row = parse_usize(cells[0], "row")?;
        let col = parse_usize(cells[1], "col")?;
        let label = if cells[2] == UNCLASSIFIED {
            None
        } else {
            Some(cells[2].to_string())
        };
        let score: f64 = cells[3].trim().parse().map_err(|e| Error::Parse {
            line: line_no,
            msg: format!("bad score '{}': {e}", cells[3]),
        })?;
        max_row = max_row.max(row);
        max_col = max_col.max(col);
        records.push((row, col, label, score));
    }
    if records.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no pixel records".into(),
        });
    }
    let mut map = ClassificationMap::new(max_row + 1, max_col + 1, (0.0, 1.0));
    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
    for (row, col, label, score) in records {
        if seen.insert((row, col), ()).is_some() {
            return Err(Error::Format(format!(
                "pixel ({row}, {col}) appears more than once"
            )));
        }
        map.set_pixel(row, col, label.as_deref(), score);
    }
    Ok(map)
}

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use dmt_core::ingest::ScalarSeries;

use crate::output::Schema;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_number(field: &str) -> Option<f64> {
    match field.trim() {
        "inf" | "Inf" | "infinity" => Some(f64::INFINITY),
        "-inf" | "-Inf" | "-infinity" => Some(f64::NEG_INFINITY),
        f => f.parse().ok(),
    }
}

/// Numeric CSV rows of equal width. A first record that is not numeric is
/// taken as a header; `#` starts a comment line.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        let parsed: Option<Vec<f64>> = record.iter().map(parse_number).collect();
        match parsed {
            Some(row) => rows.push(row),
            None if i == 0 => continue,
            None => {
                return Err(Schema(format!("{}: record {} is not numeric", path.display(), i + 1)).into());
            }
        }
    }
    if rows.is_empty() {
        return Err(Schema(format!("{}: no numeric rows", path.display())).into());
    }
    Ok(rows)
}

/// One value per row, or `t,f` pairs.
pub fn read_series(path: &Path) -> Result<ScalarSeries> {
    let rows = read_rows(path)?;
    let series = match rows[0].len() {
        1 => ScalarSeries::from_values(&rows.iter().map(|r| r[0]).collect::<Vec<_>>())?,
        2 => ScalarSeries::new(rows.iter().map(|r| (r[0], r[1])).collect())?,
        w => return Err(Schema(format!("{}: expected 1 or 2 columns, found {w}", path.display())).into()),
    };
    Ok(series)
}

/// Greyscale intensities in `[0, 1]`, row by row.
pub fn read_image(path: &Path) -> Result<Vec<Vec<f64>>> {
    let img = image::open(path).with_context(|| format!("decoding {}", path.display()))?.to_luma32f();
    let (w, h) = img.dimensions();
    Ok((0..h).map(|y| (0..w).map(|x| img.get_pixel(x, y).0[0] as f64).collect()).collect())
}

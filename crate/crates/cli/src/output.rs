//! CSV series and atomic file output.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use gaugeset::metrics::MvePoint;
use serde::{Deserialize, Serialize};

/// One row of an `m,mean,std` table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub m: usize,
    pub mean: f64,
    pub std: f64,
}

impl From<&MvePoint> for Row {
    fn from(p: &MvePoint) -> Self {
        Row { m: p.m, mean: p.mean, std: p.std }
    }
}

/// Renders rows with a `m,mean,std` header. Floats use the shortest
/// representation that round-trips.
pub fn render_series(rows: &[Row]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["m", "mean", "std"])?;
    }
    w.into_inner().context("flushing CSV buffer")
}

#[cfg(test)]
pub fn parse_series(bytes: &[u8]) -> Result<Vec<Row>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.clone();
    anyhow::ensure!(header == vec!["m", "mean", "std"], "unexpected CSV header {:?}", header);
    r.deserialize().map(|row| Ok(row?)).collect()
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(bytes).with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path).with_context(|| format!("moving output into {}", path.display()))?;
    Ok(())
}

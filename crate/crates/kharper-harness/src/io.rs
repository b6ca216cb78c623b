//! Artifact output: CSV series, NDJSON record streams, PPM heatmaps,
//! and a per-run manifest indexing what was written.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;

use kharper::Result;

/// Write rows as RFC-4180 CSV. Floats are formatted with the shortest
/// round-trip representation, so identical data gives identical bytes.
pub fn write_csv<P: AsRef<Path>>(
    path: P,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

fn io_err(e: csv::Error) -> kharper::Error {
    kharper::Error::Io(std::io::Error::other(e))
}

/// One serialized JSON object per line.
pub fn write_ndjson<P: AsRef<Path>, T: Serialize>(path: P, items: &[T]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        let line = serde_json::to_string(item)
            .map_err(|e| kharper::Error::Io(std::io::Error::other(e)))?;
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Grayscale binary PPM (P6). Values are scaled to the data maximum and
/// mapped through `v^gamma`; gamma below 1 lifts faint structure, which
/// is what phase-space densities with a few bright cells need.
pub fn write_ppm<P: AsRef<Path>>(path: P, data: &Array2<f64>, gamma: f64) -> Result<()> {
    let (rows, cols) = data.dim();
    let max = data.iter().cloned().fold(0.0f64, f64::max);
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P6\n{cols} {rows}\n255\n")?;
    // row 0 at the top of the image
    for i in 0..rows {
        for j in 0..cols {
            let v = if max > 0.0 { (data[(i, j)].max(0.0) / max).powf(gamma) } else { 0.0 };
            let byte = (v * 255.0).round().clamp(0.0, 255.0) as u8;
            w.write_all(&[byte, byte, byte])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub path: String,
    pub kind: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub artifacts: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Manifest { command: command.to_string(), seed, artifacts: Vec::new() }
    }

    /// Register an artifact path relative to the output directory.
    pub fn add(&mut self, name: &str, path: &Path, kind: &str) {
        self.artifacts.push(ManifestEntry {
            name: name.to_string(),
            path: path.to_string_lossy().into_owned(),
            kind: kind.to_string(),
        });
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut w = BufWriter::new(File::create(&path)?);
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| kharper::Error::Io(std::io::Error::other(e)))?;
        w.write_all(text.as_bytes())?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(path)
    }
}

/// Format a float with full round-trip precision.
pub fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x}")
    }
}

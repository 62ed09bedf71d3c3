//! Field snapshots on disk.
//!
//! A snapshot file is one line of JSON, `{"n":128,"time":0.5,"name":"theta"}`,
//! terminated by `\n`, followed by exactly `n*n` little-endian IEEE-754 `f64`
//! physical samples in row-major order (`x1` index outer, `x2` index inner).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::grid::Grid;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    pub time: f64,
    pub name: String,
}

pub fn write_snapshot(path: &Path, field: &ScalarField, time: f64, name: &str) -> Result<()> {
    let header = SnapshotHeader {
        n: field.grid().n(),
        time,
        name: name.to_owned(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for v in field.to_physical() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, Vec<f64>)> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end())
        .map_err(|e| Error::Snapshot(format!("bad header: {e}")))?;
    let count = header.n * header.n;
    let mut bytes = Vec::with_capacity(count * 8);
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Snapshot(format!(
            "expected {} payload bytes, found {}",
            count * 8,
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, samples))
}

/// Reads a snapshot back into a spectral field on a fresh grid.
pub fn load_field(path: &Path) -> Result<(SnapshotHeader, ScalarField)> {
    let (header, samples) = read_snapshot(path)?;
    let grid: Arc<Grid> = Grid::new(header.n)?;
    let field = ScalarField::from_physical(&grid, &samples)?;
    Ok((header, field))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("theta.snap");
        let grid = Grid::new(16).unwrap();
        let f = ScalarField::from_fn(&grid, |x1, x2| (x1 + 2.0 * x2).cos());
        write_snapshot(&path, &f, 0.25, "theta").unwrap();
        let (header, samples) = read_snapshot(&path).unwrap();
        assert_eq!(header, SnapshotHeader { n: 16, time: 0.25, name: "theta".into() });
        assert_eq!(samples, f.to_physical());
        let len = std::fs::metadata(&path).unwrap().len() as usize;
        let header_len = serde_json::to_string(&header).unwrap().len() + 1;
        assert_eq!(len, header_len + 16 * 16 * 8);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.snap");
        std::fs::write(&path, b"{\"n\":16,\"time\":0.0,\"name\":\"x\"}\n\x00\x01").unwrap();
        assert!(matches!(read_snapshot(&path), Err(Error::Snapshot(_))));
    }
}

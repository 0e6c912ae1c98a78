//! Field files: CSV (`index, x[, y], value`) and raw little-endian binary
//! with a 32-byte header.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::field::ScalarField;
use super::grid::FiberGrid;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"WGRF";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryHeader {
    pub dim: u32,
    pub counts: [u32; 2],
    pub spacing: [f64; 2],
}

impl BinaryHeader {
    pub fn of(grid: &FiberGrid) -> Self {
        let counts = [grid.count(0) as u32, grid.count(1) as u32];
        let spacing = [
            grid.spacing(0),
            if grid.dim() == 2 { grid.spacing(1) } else { 0.0 },
        ];
        Self {
            dim: grid.dim() as u32,
            counts,
            spacing,
        }
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        let mut b = [0u8; 32];
        b[..4].copy_from_slice(&MAGIC);
        b[4..8].copy_from_slice(&self.dim.to_le_bytes());
        b[8..12].copy_from_slice(&self.counts[0].to_le_bytes());
        b[12..16].copy_from_slice(&self.counts[1].to_le_bytes());
        b[16..24].copy_from_slice(&self.spacing[0].to_le_bytes());
        b[24..32].copy_from_slice(&self.spacing[1].to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; 32]) -> Result<Self> {
        if b[..4] != MAGIC {
            return Err(Error::Format("bad magic in field file".into()));
        }
        let u = |r: std::ops::Range<usize>| u32::from_le_bytes(b[r].try_into().expect("4 bytes"));
        let f = |r: std::ops::Range<usize>| f64::from_le_bytes(b[r].try_into().expect("8 bytes"));
        Ok(Self {
            dim: u(4..8),
            counts: [u(8..12), u(12..16)],
            spacing: [f(16..24), f(24..32)],
        })
    }

    pub fn node_count(&self) -> usize {
        self.counts[0] as usize * self.counts[1] as usize
    }
}

pub fn write_binary(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&BinaryHeader::of(field.grid()).to_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary_header(path: impl AsRef<Path>) -> Result<BinaryHeader> {
    let mut r = File::open(path)?;
    let mut head = [0u8; 32];
    r.read_exact(&mut head)?;
    BinaryHeader::from_bytes(&head)
}

/// Read values into `grid`; the header must match its dimension, counts and
/// spacing.
pub fn read_binary(path: impl AsRef<Path>, grid: &FiberGrid) -> Result<ScalarField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; 32];
    r.read_exact(&mut head)?;
    let h = BinaryHeader::from_bytes(&head)?;
    let want = BinaryHeader::of(grid);
    if h.dim != want.dim || h.counts != want.counts {
        return Err(Error::Format(format!(
            "field file is {}-D {:?}, grid is {}-D {:?}",
            h.dim, h.counts, want.dim, want.counts
        )));
    }
    for k in 0..grid.dim() {
        if (h.spacing[k] - want.spacing[k]).abs() > 1e-12 * want.spacing[k] {
            return Err(Error::Format(format!(
                "spacing mismatch on axis {k}: {} vs {}",
                h.spacing[k], want.spacing[k]
            )));
        }
    }
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() != 8 * grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            got: buf.len() / 8,
        });
    }
    let vals = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ScalarField::new(*grid, vals)
}

pub fn write_csv(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let grid = field.grid();
    let mut w = csv::Writer::from_path(path)?;
    if grid.dim() == 2 {
        w.write_record(["index", "x", "y", "value"])?;
    } else {
        w.write_record(["index", "x", "value"])?;
    }
    for (p, v) in field.values().iter().enumerate() {
        let [x, y] = grid.coord(p);
        if grid.dim() == 2 {
            w.write_record([p.to_string(), fmt(x), fmt(y), fmt(*v)])?;
        } else {
            w.write_record([p.to_string(), fmt(x), fmt(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip representation.
fn fmt(v: f64) -> String {
    format!("{v:?}")
}

/// Read a CSV written by [`write_csv`] (or any file whose last column holds
/// the values in node order) into `grid`.
pub fn read_csv(path: impl AsRef<Path>, grid: &FiberGrid) -> Result<ScalarField> {
    let mut r = csv::Reader::from_path(path)?;
    let mut vals = vec![f64::NAN; grid.len()];
    let mut seen = 0;
    for rec in r.records() {
        let rec = rec?;
        let idx: usize = rec
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Format("bad node index".into()))?;
        let val: f64 = rec
            .get(rec.len() - 1)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Format(format!("bad value at node {idx}")))?;
        if idx >= grid.len() {
            return Err(Error::Format(format!("node index {idx} out of range")));
        }
        vals[idx] = val;
        seen += 1;
    }
    if seen != grid.len() || vals.iter().any(|v| v.is_nan()) {
        return Err(Error::Shape {
            expected: grid.len(),
            got: seen,
        });
    }
    ScalarField::new(*grid, vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = FiberGrid::periodic(&[1.0, 2.0], &[8, 6]).unwrap();
        let u = ScalarField::random_smooth(g, 1.0, 3, 1);
        let p = dir.path().join("u.bin");
        write_binary(&u, &p).unwrap();
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 32 + 8 * 48);
        let h = read_binary_header(&p).unwrap();
        assert_eq!(h.counts, [8, 6]);
        assert_eq!(read_binary(&p, &g).unwrap(), u);
        let other = FiberGrid::periodic(&[1.0, 2.0], &[6, 8]).unwrap();
        assert!(read_binary(&p, &other).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = FiberGrid::bounded(&[0.0], &[1.0], &[9]).unwrap();
        let u = ScalarField::from_fn(g, |x, _| x.sin() / 3.0);
        let p = dir.path().join("u.csv");
        write_csv(&u, &p).unwrap();
        assert_eq!(read_csv(&p, &g).unwrap(), u);
    }
}

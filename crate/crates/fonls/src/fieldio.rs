//! Field persistence: a flat little-endian binary container holding the
//! grid shape and the row-major complex64 samples, with a human-readable
//! JSON sidecar written next to it. Round trips are bit-exact.
//!
//! Layout of the binary file:
//!
//! ```text
//! u64       dim (1 or 2)
//! u64 * dim points per axis
//! f64 * dim half length per axis
//! (f64, f64) * prod(points)   re, im pairs in row-major sample order
//! ```

use crate::field::Field;
use crate::grid::Grid;
use crate::{FonlsError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    format: String,
    dim: usize,
    points: Vec<usize>,
    half_length: Vec<f64>,
    samples: usize,
}

const FORMAT_NAME: &str = "complex64-le-v1";

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    std::path::PathBuf::from(os)
}

/// Write the field and its sidecar. Existing files are replaced.
pub fn save_field(field: &Field, path: &Path) -> Result<()> {
    let grid = field.grid();
    let mut buf: Vec<u8> = Vec::with_capacity(16 + 16 * field.samples().len());
    buf.extend_from_slice(&(grid.dim() as u64).to_le_bytes());
    for a in 0..grid.dim() {
        buf.extend_from_slice(&(grid.points(a) as u64).to_le_bytes());
    }
    for a in 0..grid.dim() {
        buf.extend_from_slice(&grid.half_length(a).to_le_bytes());
    }
    for v in field.samples() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;

    let sidecar = Sidecar {
        format: FORMAT_NAME.to_string(),
        dim: grid.dim(),
        points: (0..grid.dim()).map(|a| grid.points(a)).collect(),
        half_length: (0..grid.dim()).map(|a| grid.half_length(a)).collect(),
        samples: field.samples().len(),
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| FonlsError::Config(format!("sidecar serialization failed: {e}")))?;
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

fn take_u64(buf: &[u8], off: &mut usize) -> Result<u64> {
    let end = *off + 8;
    if end > buf.len() {
        return Err(FonlsError::Config("field file truncated".into()));
    }
    let v = u64::from_le_bytes(buf[*off..end].try_into().unwrap());
    *off = end;
    Ok(v)
}

fn take_f64(buf: &[u8], off: &mut usize) -> Result<f64> {
    let end = *off + 8;
    if end > buf.len() {
        return Err(FonlsError::Config("field file truncated".into()));
    }
    let v = f64::from_le_bytes(buf[*off..end].try_into().unwrap());
    *off = end;
    Ok(v)
}

/// Read a field back. The sidecar is advisory and not required to load.
pub fn load_field(path: &Path) -> Result<Field> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    let mut off = 0usize;
    let dim = take_u64(&buf, &mut off)? as usize;
    if !(1..=2).contains(&dim) {
        return Err(FonlsError::Config(format!("field file declares dim = {dim}")));
    }
    let mut points = Vec::with_capacity(dim);
    for _ in 0..dim {
        points.push(take_u64(&buf, &mut off)? as usize);
    }
    let mut half_length = Vec::with_capacity(dim);
    for _ in 0..dim {
        half_length.push(take_f64(&buf, &mut off)?);
    }
    let grid = Grid::new(&points, &half_length)?;
    let n_total = grid.total_points();
    let expected = off + 16 * n_total;
    if buf.len() != expected {
        return Err(FonlsError::Config(format!(
            "field file holds {} bytes, expected {expected} for {n_total} samples",
            buf.len()
        )));
    }
    let mut samples = Vec::with_capacity(n_total);
    for _ in 0..n_total {
        let re = take_f64(&buf, &mut off)?;
        let im = take_f64(&buf, &mut off)?;
        samples.push(Complex64::new(re, im));
    }
    Field::from_samples(grid, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new(&[16, 8], &[4.0, 2.0]).unwrap();
        let f = Field::from_fn(g, |x| {
            Complex64::new((x[0] * 1.7).sin() * 1e-17, (x[1] * 0.3).cos() * 1e9)
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.bin");
        save_field(&f, &path).unwrap();
        let g2 = load_field(&path).unwrap();
        assert_eq!(f.grid(), g2.grid());
        for (a, b) in f.samples().iter().zip(g2.samples()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let sidecar: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path.with_extension("bin.json")).unwrap())
                .unwrap();
        assert_eq!(sidecar["dim"], 2);
        assert_eq!(sidecar["samples"], 128);
    }

    #[test]
    fn truncated_files_are_rejected() {
        let g = Grid::new(&[8], &[1.0]).unwrap();
        let f = Field::zeros(g);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.bin");
        save_field(&f, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(load_field(&path).is_err());
    }
}

//! ALCV1 binary tensor files.
//!
//! Layout: magic `ALCV1`, three little-endian u32 dims (height, width,
//! feature_dim), then `H·W·D` little-endian IEEE-754 f32 values, cells in
//! row-major order with the feature dimension contiguous per cell.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"ALCV1";

/// Upper bound on stored values; rejects absurd headers before allocating.
const MAX_VALUES: u64 = 1 << 28;

/// Writes one tensor. Values are quantized to f32 on disk, so callers that
/// need bit-exact round-trips must hold f32-representable values.
pub fn write_tensor(
    path: &Path,
    height: usize,
    width: usize,
    feature_dim: usize,
    values: &[f64],
) -> Result<()> {
    let expect = height * width * feature_dim;
    if values.len() != expect {
        return Err(Error::config(format!(
            "tensor holds {} values, dims {height}×{width}×{feature_dim} imply {expect}",
            values.len()
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    out.write_all(MAGIC).map_err(io_err)?;
    for dim in [height, width, feature_dim] {
        let dim = u32::try_from(dim)
            .map_err(|_| Error::config(format!("dimension {dim} exceeds u32")))?;
        out.write_all(&dim.to_le_bytes()).map_err(io_err)?;
    }
    for &v in values {
        out.write_all(&(v as f32).to_le_bytes()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Reads one tensor, widening values to f64.
pub fn read_tensor(path: &Path) -> Result<(usize, usize, usize, Vec<f64>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut input = BufReader::new(file);
    let bad = |detail: String| Error::BadTensorFile {
        path: path.to_path_buf(),
        detail,
    };

    let mut magic = [0u8; 5];
    input
        .read_exact(&mut magic)
        .map_err(|e| bad(format!("cannot read magic: {e}")))?;
    if &magic != MAGIC {
        return Err(bad(format!("magic {magic:?} is not ALCV1")));
    }

    let mut dims = [0usize; 3];
    for dim in &mut dims {
        let mut raw = [0u8; 4];
        input
            .read_exact(&mut raw)
            .map_err(|e| bad(format!("truncated header: {e}")))?;
        *dim = u32::from_le_bytes(raw) as usize;
    }
    let [height, width, feature_dim] = dims;
    if height == 0 || width == 0 || feature_dim == 0 {
        return Err(bad(format!(
            "zero dimension in header {height}×{width}×{feature_dim}"
        )));
    }
    let count = height as u64 * width as u64 * feature_dim as u64;
    if count > MAX_VALUES {
        return Err(bad(format!("header implies {count} values")));
    }

    let mut values = Vec::with_capacity(count as usize);
    let mut raw = [0u8; 4];
    for _ in 0..count {
        input
            .read_exact(&mut raw)
            .map_err(|e| bad(format!("truncated payload: {e}")))?;
        let v = f32::from_le_bytes(raw);
        if !v.is_finite() {
            return Err(bad(format!("non-finite value {v}")));
        }
        values.push(v as f64);
    }
    let mut trailing = [0u8; 1];
    match input.read(&mut trailing) {
        Ok(0) => Ok((height, width, feature_dim, values)),
        Ok(_) => Err(bad("trailing bytes after payload".into())),
        Err(e) => Err(bad(format!("cannot probe for trailing bytes: {e}"))),
    }
}

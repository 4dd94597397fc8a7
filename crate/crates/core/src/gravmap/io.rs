//! `GGV1` binary grid files.
//!
//! Layout, all little-endian: the four magic bytes `GGV1`; origin_lat,
//! origin_lon, d_lat, d_lon as f64; n_rows, n_cols, priority as i32;
//! reference_altitude as f64; then n_rows × n_cols f64 values, row-major.

use std::fs;
use std::path::Path;

use super::grid::GravityGradientGrid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GGV1";
pub const HEADER_LEN: usize = 4 + 4 * 8 + 3 * 4 + 8;

pub fn encode_grid(grid: &GravityGradientGrid) -> Result<Vec<u8>> {
    let dim = |n: usize, what: &str| {
        i32::try_from(n).map_err(|_| Error::InvalidGrid(format!("{what} {n} does not fit in i32")))
    };
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.values.len());
    out.extend_from_slice(MAGIC);
    for v in [grid.origin_lat, grid.origin_lon, grid.d_lat, grid.d_lon] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&dim(grid.n_rows, "n_rows")?.to_le_bytes());
    out.extend_from_slice(&dim(grid.n_cols, "n_cols")?.to_le_bytes());
    out.extend_from_slice(&grid.priority.to_le_bytes());
    out.extend_from_slice(&grid.reference_altitude.to_le_bytes());
    for v in &grid.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.offset + N;
        let chunk = self.bytes.get(self.offset..end).ok_or_else(|| Error::FormatError {
            offset: self.offset,
            reason: format!("unexpected end of data reading {what}"),
        })?;
        self.offset = end;
        Ok(chunk.try_into().expect("slice length checked"))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        self.take::<8>(what).map(f64::from_le_bytes)
    }

    fn dim(&mut self, what: &str) -> Result<usize> {
        let at = self.offset;
        let v = i32::from_le_bytes(self.take::<4>(what)?);
        usize::try_from(v).map_err(|_| Error::FormatError {
            offset: at,
            reason: format!("negative {what} ({v})"),
        })
    }
}

pub fn decode_grid(bytes: &[u8]) -> Result<GravityGradientGrid> {
    let mut r = Reader { bytes, offset: 0 };
    if &r.take::<4>("magic")? != MAGIC {
        return Err(Error::FormatError {
            offset: 0,
            reason: "bad magic, expected GGV1".into(),
        });
    }
    let origin_lat = r.f64("origin_lat")?;
    let origin_lon = r.f64("origin_lon")?;
    let d_lat = r.f64("d_lat")?;
    let d_lon = r.f64("d_lon")?;
    let n_rows = r.dim("n_rows")?;
    let n_cols = r.dim("n_cols")?;
    let priority = i32::from_le_bytes(r.take::<4>("priority")?);
    let reference_altitude = r.f64("reference_altitude")?;

    let count = n_rows.checked_mul(n_cols).ok_or_else(|| Error::FormatError {
        offset: HEADER_LEN,
        reason: "grid dimensions overflow".into(),
    })?;
    let remaining = bytes.len() - r.offset;
    if remaining != count * 8 {
        return Err(Error::FormatError {
            offset: r.offset + remaining.min(count * 8),
            reason: format!("expected {} value bytes, found {remaining}", count * 8),
        });
    }
    let values = bytes[r.offset..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    GravityGradientGrid::new(
        origin_lat,
        origin_lon,
        d_lat,
        d_lon,
        n_rows,
        n_cols,
        reference_altitude,
        priority,
        values,
    )
}

pub fn save_grid(grid: &GravityGradientGrid, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_grid(grid)?)?;
    Ok(())
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<GravityGradientGrid> {
    decode_grid(&fs::read(path)?)
}

//! Raw field snapshots: a 32-byte little-endian header followed by `n^3`
//! little-endian `f64` samples in row-major order.
//!
//! | bytes  | content                 |
//! |--------|-------------------------|
//! | 0..4   | magic `FSF1`            |
//! | 4..8   | `n` as `u32`            |
//! | 8..16  | `L` as `f64`            |
//! | 16..20 | component index `u32`   |
//! | 20..32 | zero padding            |

use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::field::ScalarField;
use super::grid::Grid3;

pub const MAGIC: &[u8; 4] = b"FSF1";
pub const HEADER_LEN: usize = 32;

pub fn write_snapshot<W: Write>(mut out: W, field: &ScalarField, component: u32) -> Result<()> {
    let grid = field.grid();
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(MAGIC);
    header[4..8].copy_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    header[8..16].copy_from_slice(&grid.box_length().to_le_bytes());
    header[16..20].copy_from_slice(&component.to_le_bytes());
    out.write_all(&header)?;
    let mut buf = Vec::with_capacity(field.values().len() * 8);
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Returns the field and its component index.
pub fn read_snapshot<R: Read>(mut input: R) -> Result<(ScalarField, u32)> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let l = f64::from_le_bytes(header[8..16].try_into().unwrap());
    let component = u32::from_le_bytes(header[16..20].try_into().unwrap());
    let grid = Grid3::new(l, n)?;
    let mut raw = vec![0u8; grid.len() * 8];
    input.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok((ScalarField::new(grid, values)?, component))
}

//! Field import/export: flat binary of 64-bit floats with a 16-byte header,
//! plus a human-readable sidecar.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//!   offset  size  content
//!   0       4     magic "HLF1"
//!   4       4     complex dimension n (u32)
//!   8       4     grid side N (u32)
//!   12      1     flags: bit 0 = chart-local field
//!   13      3     reserved, must be zero
//!   16      8·N^(2n)  node values, f64, row-major flat order
//! ```
//!
//! Decoding treats the input as untrusted: the header is fully validated —
//! magic, dimension and side ranges, total-node cap, exact payload length —
//! before any value buffer is allocated, so a hostile header cannot request
//! memory the payload does not actually contain. Non-finite values are
//! rejected; a decoded field is always usable as-is.
//!
//! `write_field` also emits `<path>.meta`, a sidecar in the same `key =
//! value` text family as run configs, for quick inspection without a decoder.

use std::path::Path;

use crate::error::{LabError, Result};
use crate::torus::{TorusField, TorusGrid};

/// File magic, version 1.
pub const MAGIC: [u8; 4] = *b"HLF1";

/// Header length in bytes.
pub const HEADER_LEN: usize = 16;

/// Serialize a field to the binary format.
pub fn encode(field: &TorusField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.total_points());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(grid.complex_dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.side() as u32).to_le_bytes());
    out.push(u8::from(field.is_chart()));
    out.extend_from_slice(&[0u8; 3]);
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn format_err(msg: impl Into<String>) -> LabError {
    LabError::FieldFormat(msg.into())
}

/// Deserialize and validate a field from the binary format.
pub fn decode(bytes: &[u8]) -> Result<TorusField> {
    if bytes.len() < HEADER_LEN {
        return Err(format_err(format!(
            "truncated header: {} bytes, need {HEADER_LEN}",
            bytes.len()
        )));
    }
    if bytes[0..4] != MAGIC {
        return Err(format_err("bad magic: expected \"HLF1\""));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let side = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let flags = bytes[12];
    if bytes[13..16] != [0, 0, 0] {
        return Err(format_err("reserved header bytes must be zero"));
    }
    if flags > 1 {
        return Err(format_err(format!("unknown flag byte {flags:#04x}")));
    }
    let chart = flags == 1;
    // Grid construction enforces the dimension/side ranges and the total-node
    // cap in wide arithmetic, so the length check below cannot overflow.
    let grid = TorusGrid::new(n as usize, side as usize)?;
    let expected = HEADER_LEN as u128 + 8 * grid.total_points() as u128;
    if bytes.len() as u128 != expected {
        return Err(format_err(format!(
            "payload length mismatch: {} bytes for {} declared nodes (need {expected})",
            bytes.len(),
            grid.total_points()
        )));
    }
    let mut values = Vec::with_capacity(grid.total_points());
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(format_err(format!("non-finite value at node {i}")));
        }
        values.push(v);
    }
    TorusField::from_values(&grid, chart, values)
}

/// Human-readable sidecar text for a field.
pub fn sidecar_text(field: &TorusField) -> String {
    let grid = field.grid();
    let (lo, hi) = field
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    format!(
        "format = HLF1\nn = {}\ngrid = {}\nchart = {}\npoints = {}\nmin = {lo}\nmax = {hi}\n",
        grid.complex_dim(),
        grid.side(),
        u8::from(field.is_chart()),
        grid.total_points(),
    )
}

/// Write the binary field and its `<path>.meta` sidecar.
pub fn write_field(path: &Path, field: &TorusField) -> Result<()> {
    std::fs::write(path, encode(field))?;
    let mut meta = path.as_os_str().to_owned();
    meta.push(".meta");
    std::fs::write(meta, sidecar_text(field))?;
    Ok(())
}

/// Read a binary field; the sidecar is informational and never consulted.
pub fn read_field(path: &Path) -> Result<TorusField> {
    decode(&std::fs::read(path)?)
}

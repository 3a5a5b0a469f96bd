//! Binary value and control table files.
//!
//! Layout (little-endian): 7-byte magic, u32 version, u32 ndim, then per
//! axis u64 N, f64 min, f64 max, u8 periodic; payload of f64 row-major with
//! the last axis fastest; trailing CRC32 of the payload bytes. The control
//! file stores the α field followed by the μ field.

use super::grid::{Axis, ControlTable, Grid7, GriddedValueFunction, NDIM};
use super::SolveError;
use std::fs;
use std::path::Path;

pub const VALUE_MAGIC: &[u8; 7] = b"AWEVF01";
pub const CONTROL_MAGIC: &[u8; 7] = b"AWECT01";
pub const VERSION: u32 = 1;
pub const AXIS_BYTES: usize = 8 + 8 + 8 + 1;
pub const HEADER_BYTES: usize = 7 + 4 + 4 + NDIM * AXIS_BYTES;

fn format_err(msg: impl Into<String>) -> SolveError {
    SolveError::Format(msg.into())
}

fn encode(magic: &[u8; 7], grid: &Grid7, fields: &[&[f64]]) -> Vec<u8> {
    let n: usize = fields.iter().map(|f| f.len()).sum();
    let mut out = Vec::with_capacity(HEADER_BYTES + 8 * n + 4);
    out.extend_from_slice(magic);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(NDIM as u32).to_le_bytes());
    for a in &grid.axes {
        out.extend_from_slice(&(a.n as u64).to_le_bytes());
        out.extend_from_slice(&a.min.to_le_bytes());
        out.extend_from_slice(&a.max.to_le_bytes());
        out.push(a.periodic as u8);
    }
    let start = out.len();
    for f in fields {
        for x in f.iter() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out[start..]);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SolveError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| format_err("truncated file"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, SolveError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, SolveError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, SolveError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn decode(magic: &[u8; 7], buf: &[u8], n_fields: usize) -> Result<(Grid7, Vec<Vec<f64>>), SolveError> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(7)? != magic {
        return Err(format_err("bad magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(format_err(format!("unsupported version {version}")));
    }
    let ndim = r.u32()?;
    if ndim as usize != NDIM {
        return Err(format_err(format!("expected {NDIM} axes, found {ndim}")));
    }
    let mut axes = [Axis::frozen(0.0); NDIM];
    for a in axes.iter_mut() {
        let n = r.u64()?;
        let min = r.f64()?;
        let max = r.f64()?;
        let periodic = match r.take(1)?[0] {
            0 => false,
            1 => true,
            b => return Err(format_err(format!("bad periodic flag {b}"))),
        };
        *a = Axis { n: usize::try_from(n).map_err(|_| format_err("axis too long"))?, min, max, periodic };
    }
    let grid = Grid7::new(axes).map_err(|e| format_err(e.to_string()))?;
    let len = grid.len();
    let payload_bytes = len
        .checked_mul(8 * n_fields)
        .ok_or_else(|| format_err("grid too large"))?;
    if buf.len() != HEADER_BYTES + payload_bytes + 4 {
        return Err(format_err(format!(
            "size mismatch: expected {} bytes, found {}",
            HEADER_BYTES + payload_bytes + 4,
            buf.len()
        )));
    }
    let payload = r.take(payload_bytes)?;
    let crc = r.u32()?;
    if crc32fast::hash(payload) != crc {
        return Err(format_err("checksum mismatch"));
    }
    let fields = payload
        .chunks_exact(8 * len)
        .map(|c| c.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
        .collect();
    Ok((grid, fields))
}

pub fn encode_value(v: &GriddedValueFunction) -> Vec<u8> {
    encode(VALUE_MAGIC, &v.grid, &[&v.values])
}

pub fn encode_controls(c: &ControlTable) -> Vec<u8> {
    encode(CONTROL_MAGIC, &c.grid, &[&c.alpha, &c.mu])
}

/// The horizon is not part of the file; loaded value functions carry t = 0.
pub fn decode_value(buf: &[u8]) -> Result<GriddedValueFunction, SolveError> {
    let (grid, mut f) = decode(VALUE_MAGIC, buf, 1)?;
    Ok(GriddedValueFunction { grid, values: f.remove(0), t: 0.0 })
}

pub fn decode_controls(buf: &[u8]) -> Result<ControlTable, SolveError> {
    let (grid, mut f) = decode(CONTROL_MAGIC, buf, 2)?;
    let mu = f.remove(1);
    Ok(ControlTable { grid, alpha: f.remove(0), mu })
}

pub fn save_value(path: &Path, v: &GriddedValueFunction) -> Result<(), SolveError> {
    Ok(fs::write(path, encode_value(v))?)
}

pub fn load_value(path: &Path) -> Result<GriddedValueFunction, SolveError> {
    decode_value(&fs::read(path)?)
}

pub fn save_controls(path: &Path, c: &ControlTable) -> Result<(), SolveError> {
    Ok(fs::write(path, encode_controls(c))?)
}

pub fn load_controls(path: &Path) -> Result<ControlTable, SolveError> {
    decode_controls(&fs::read(path)?)
}

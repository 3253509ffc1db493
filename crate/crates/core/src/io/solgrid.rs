//! SOLGRID1 binary field dumps.
//!
//! Layout (little-endian): 8-byte magic, u64 nx, u64 ny, f64 dx, f64 dy,
//! f64 z, then `nx·ny` samples of (f64 re, f64 im) in row-major order.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::bpm::ScalarField;
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SOLGRID1";
const HEADER_LEN: usize = 8 + 5 * 8;

pub fn encode_grid(field: &ScalarField) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * field.amp.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(field.nx as u64).to_le_bytes());
    out.extend_from_slice(&(field.ny as u64).to_le_bytes());
    for v in [field.dx, field.dy, field.z] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for a in &field.amp {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take8(&mut self) -> Result<[u8; 8]> {
        let end = self.pos + 8;
        if end > self.bytes.len() {
            return Err(Error::Truncated { offset: self.bytes.len() as u64 });
        }
        let mut b = [0u8; 8];
        b.copy_from_slice(&self.bytes[self.pos..end]);
        self.pos = end;
        Ok(b)
    }

    fn u64(&mut self) -> Result<u64> {
        self.take8().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64> {
        self.take8().map(f64::from_le_bytes)
    }
}

pub fn decode_grid(bytes: &[u8]) -> Result<ScalarField> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take8()?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", String::from_utf8_lossy(&magic))));
    }
    let nx = r.u64()?;
    let ny = r.u64()?;
    let (dx, dy, z) = (r.f64()?, r.f64()?, r.f64()?);
    let payload = nx
        .checked_mul(ny)
        .and_then(|n| n.checked_mul(16))
        .filter(|&n| usize::try_from(n).is_ok_and(|n| n.checked_add(HEADER_LEN).is_some()))
        .ok_or_else(|| Error::Format(format!("dimension overflow: {nx} x {ny}")))?;
    let n = (nx * ny) as usize;
    let expected = HEADER_LEN + payload as usize;
    if bytes.len() < expected {
        return Err(Error::Truncated { offset: bytes.len() as u64 });
    }
    if bytes.len() > expected {
        return Err(Error::Format(format!("{} trailing bytes after the samples", bytes.len() - expected)));
    }
    let mut amp = Vec::with_capacity(n);
    for _ in 0..n {
        amp.push(Complex64::new(r.f64()?, r.f64()?));
    }
    Ok(ScalarField { nx: nx as usize, ny: ny as usize, dx, dy, z, amp })
}

pub fn dump_grid(field: &ScalarField, path: &Path) -> Result<()> {
    if field.amp.len() != field.nx * field.ny {
        return Err(Error::Format(format!(
            "field holds {} samples, expected {} x {}",
            field.amp.len(),
            field.nx,
            field.ny
        )));
    }
    fs::write(path, encode_grid(field))?;
    Ok(())
}

pub fn load_grid(path: &Path) -> Result<ScalarField> {
    decode_grid(&fs::read(path)?)
}

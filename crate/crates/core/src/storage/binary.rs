//! Little-endian binary dump of packed storage.
//!
//! Layout:
//!
//! ```text
//! magic    4 bytes  "SPTS"
//! version  u32      1
//! rank     u32
//! shape    rank x u64
//! levels   rank x u8     0 = dense, 1 = compressed
//! ordering rank x u32    storage level of each logical dimension
//! widths   2 x u8        pointer width, index width (0 = native)
//! per compressed level, in storage order:
//!   u64 count, count pointers at the pointer width
//!   u64 count, count indices at the index width
//! u64 count, count values as f64
//! ```
//!
//! Native widths are written as 64-bit integers.

use std::io::{Read, Write};

use super::SparseStorage;
use crate::encoding::{Encoding, LevelType};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SPTS";
const VERSION: u32 = 1;

pub fn write_binary<W: Write>(s: &SparseStorage, mut w: W) -> Result<()> {
    let enc = s.encoding();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(s.rank() as u32).to_le_bytes())?;
    for &n in s.shape() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for &l in enc.levels() {
        w.write_all(&[l.is_compressed() as u8])?;
    }
    for &o in enc.ordering() {
        w.write_all(&(o as u32).to_le_bytes())?;
    }
    w.write_all(&[enc.pointer_bit_width() as u8, enc.index_bit_width() as u8])?;
    for l in 0..s.rank() {
        if enc.level_type(l).is_compressed() {
            write_ints(&mut w, s.pointers_raw(l), enc.pointer_bit_width())?;
            write_ints(&mut w, s.indices_raw(l), enc.index_bit_width())?;
        }
    }
    w.write_all(&(s.values_view().len() as u64).to_le_bytes())?;
    for v in s.values_view() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SparseStorage> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    if read_u32(&mut r)? != VERSION {
        return Err(bad("unsupported version"));
    }
    let rank = read_u32(&mut r)? as usize;
    let shape = (0..rank)
        .map(|_| read_u64(&mut r).map(|n| n as usize))
        .collect::<Result<Vec<_>>>()?;
    let levels = (0..rank)
        .map(|_| {
            Ok(match read_u8(&mut r)? {
                0 => LevelType::Dense,
                1 => LevelType::Compressed,
                _ => return Err(bad("bad level type")),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ordering = (0..rank)
        .map(|_| read_u32(&mut r).map(|o| o as usize))
        .collect::<Result<Vec<_>>>()?;
    let pw = read_u8(&mut r)? as u32;
    let iw = read_u8(&mut r)? as u32;
    let encoding = Encoding::new(levels, Some(ordering), Some(pw), Some(iw))?;
    let mut pointers = vec![Vec::new(); rank];
    let mut indices = vec![Vec::new(); rank];
    for l in 0..rank {
        if encoding.level_type(l).is_compressed() {
            pointers[l] = read_ints(&mut r, pw)?;
            indices[l] = read_ints(&mut r, iw)?;
        }
    }
    let n = read_u64(&mut r)? as usize;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        values.push(f64::from_le_bytes(b));
    }
    SparseStorage::from_parts(shape, encoding, pointers, indices, values)
}

fn width_bytes(width: u32) -> usize {
    if width == 0 {
        8
    } else {
        width as usize / 8
    }
}

fn write_ints<W: Write>(w: &mut W, xs: &[usize], width: u32) -> Result<()> {
    let nb = width_bytes(width);
    w.write_all(&(xs.len() as u64).to_le_bytes())?;
    for &x in xs {
        w.write_all(&(x as u64).to_le_bytes()[..nb])?;
    }
    Ok(())
}

fn read_ints<R: Read>(r: &mut R, width: u32) -> Result<Vec<usize>> {
    let nb = width_bytes(width);
    let n = read_u64(r)? as usize;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut b = [0u8; 8];
        r.read_exact(&mut b[..nb])?;
        out.push(u64::from_le_bytes(b) as usize);
    }
    Ok(out)
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn bad(msg: &str) -> Error {
    Error::Parse {
        line: 0,
        reason: format!("binary storage: {msg}"),
    }
}

//! Binary matrix cache for fast reload.
//!
//! Layout, all integers little-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 8 | magic `ADASPMV\0` |
//! | 4 | format version (u32, currently 1) |
//! | 1 | value width in bytes (4 or 8) |
//! | 3 | zero padding |
//! | 8 | rows (u64) |
//! | 8 | cols (u64) |
//! | 8 | nnz (u64) |
//! | 8·(rows+1) | row offsets (u64) |
//! | 8·nnz | column indices (u64) |
//! | width·nnz | values (f32 or f64) |
//!
//! Only the CSR layout is stored; the CSC layout is rebuilt on load.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::{CsrMatrix, DualMatrix};

pub const MAGIC: &[u8; 8] = b"ADASPMV\0";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 24;

pub fn encode_binary<T: Scalar>(m: &CsrMatrix<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (m.rows() + 1 + m.nnz()) + T::WIDTH as usize * m.nnz());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&[T::WIDTH, 0, 0, 0]);
    for d in [m.rows(), m.cols(), m.nnz()] {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for &o in m.row_offsets() {
        out.extend_from_slice(&(o as u64).to_le_bytes());
    }
    for &c in m.col_indices() {
        out.extend_from_slice(&(c as u64).to_le_bytes());
    }
    for &v in m.values() {
        v.write_le(&mut out);
    }
    out
}

fn corrupt<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line: 0, message: format!("binary cache: {}", msg.into()) })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return corrupt("truncated file");
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).or_else(|_| corrupt("value does not fit in usize"))
    }
}

pub fn is_binary_cache(bytes: &[u8]) -> bool {
    bytes.starts_with(MAGIC)
}

/// Decodes a cache produced by [`encode_binary`]. Values stored at the other
/// width are converted.
pub fn decode_binary<T: Scalar>(bytes: &[u8]) -> Result<CsrMatrix<T>> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(8)? != MAGIC {
        return corrupt("bad magic");
    }
    let version = u32::from_le_bytes(cur.take(4)?.try_into().expect("4 bytes"));
    if version != VERSION {
        return corrupt(format!("unsupported version {version}"));
    }
    let width = cur.take(4)?[0];
    if width != 4 && width != 8 {
        return corrupt(format!("unsupported value width {width}"));
    }
    let rows = cur.usize()?;
    let cols = cur.usize()?;
    let nnz = cur.usize()?;
    let needed = rows
        .checked_add(1)
        .and_then(|r| r.checked_add(nnz))
        .and_then(|k| k.checked_mul(8))
        .and_then(|k| k.checked_add(nnz.checked_mul(width as usize)?));
    match needed {
        Some(n) if n == bytes.len() - cur.pos => {}
        _ => return corrupt("length does not match header"),
    }
    let mut offsets = Vec::with_capacity(rows + 1);
    for _ in 0..=rows {
        offsets.push(cur.usize()?);
    }
    let mut indices = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        indices.push(cur.usize()?);
    }
    let mut values = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let raw = cur.take(width as usize)?;
        let v = if width == 8 { f64::read_le(raw) } else { f32::read_le(raw) as f64 };
        values.push(if width == T::WIDTH { T::read_le(raw) } else { T::from_f64_lossy(v) });
    }
    CsrMatrix::new(rows, cols, offsets, indices, values)
}

pub fn save_binary<T: Scalar>(m: &CsrMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_binary(m))?;
    Ok(())
}

pub fn load_binary<T: Scalar>(path: impl AsRef<Path>) -> Result<DualMatrix<T>> {
    let csr = decode_binary(&fs::read(path)?)?;
    if csr.rows() == 0 || csr.cols() == 0 {
        return corrupt("matrix has zero rows or columns");
    }
    Ok(DualMatrix::from_csr(csr))
}

/// Loads either a binary cache (detected by magic) or a Matrix Market file.
pub fn load_matrix<T: Scalar>(path: impl AsRef<Path>) -> Result<DualMatrix<T>> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    if is_binary_cache(&bytes) {
        let csr = decode_binary(&bytes)?;
        if csr.rows() == 0 || csr.cols() == 0 {
            return corrupt("matrix has zero rows or columns");
        }
        Ok(DualMatrix::from_csr(csr))
    } else {
        crate::sparse::market::read_matrix_market(bytes.as_slice())
    }
}

//! Binary frame-file format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   4 bytes  "SBFM"
//! version u16      1
//! n_frames u64
//! n_dims   u32
//! dtype    u8      1 = f64
//! payload  n_frames * n_dims f64, row-major, little-endian
//! ```
//!
//! Write-then-read reproduces the matrix bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const FRAME_MAGIC: &[u8; 4] = b"SBFM";
const FRAME_VERSION: u16 = 1;
const DTYPE_F64: u8 = 1;

pub fn write_frames(path: &Path, frames: &Matrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(FRAME_MAGIC)?;
    w.write_all(&FRAME_VERSION.to_le_bytes())?;
    w.write_all(&(frames.rows() as u64).to_le_bytes())?;
    w.write_all(&(frames.cols() as u32).to_le_bytes())?;
    w.write_all(&[DTYPE_F64])?;
    for v in frames.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_frames(path: &Path) -> Result<Matrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Parse(format!("{}: truncated header", path.display())))?;
    if &magic != FRAME_MAGIC {
        return Err(Error::Parse(format!(
            "{}: bad magic, not a frame file",
            path.display()
        )));
    }
    let version = read_u16(&mut r)?;
    if version != FRAME_VERSION {
        return Err(Error::Parse(format!(
            "{}: unsupported frame-file version {version}",
            path.display()
        )));
    }
    let n_frames = read_u64(&mut r)? as usize;
    let n_dims = read_u32(&mut r)? as usize;
    let dtype = read_u8(&mut r)?;
    if dtype != DTYPE_F64 {
        return Err(Error::Parse(format!(
            "{}: unsupported dtype tag {dtype}",
            path.display()
        )));
    }
    let data = read_f64_vec(&mut r, n_frames * n_dims)
        .map_err(|_| Error::Parse(format!("{}: truncated payload", path.display())))?;
    Matrix::from_vec(n_frames, n_dims, data)
}

pub(crate) fn read_u8(r: &mut impl Read) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

pub(crate) fn read_u16(r: &mut impl Read) -> Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_f64_vec(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub(crate) fn write_f64_slice(w: &mut impl Write, xs: &[f64]) -> Result<()> {
    for v in xs {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn frame_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frames.sbfm");
        let m = synth::synthetic_corpus(12, 37, 19);
        write_frames(&path, &m).unwrap();
        let back = read_frames(&path).unwrap();
        assert_eq!(m.shape(), back.shape());
        for (a, b) in m.data().iter().zip(back.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_garbage_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.sbfm");
        std::fs::write(&path, b"not a frame file at all").unwrap();
        assert!(read_frames(&path).is_err());
    }

    #[test]
    fn empty_matrix_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.sbfm");
        let m = Matrix::zeros(0, 8);
        write_frames(&path, &m).unwrap();
        let back = read_frames(&path).unwrap();
        assert_eq!(back.shape(), (0, 8));
    }
}

//! Binary field snapshots.
//!
//! Layout, all little-endian: magic `b"DKGF"`, `version: u32`, `n: u32`,
//! `count: u32`, then `count` fields of `n²` complex coefficients stored as
//! `(re: f64, im: f64)` pairs in grid storage order (`ξ₁` fastest, FFT order
//! along each axis).

use std::io::{Read, Write};

use rustfft::num_complex::Complex64;

use super::{FourierGrid, SpectralField};
use crate::error::{DkgError, Result};

pub const MAGIC: [u8; 4] = *b"DKGF";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut w: W, fields: &[SpectralField]) -> Result<()> {
    let n = fields.first().map(|f| f.grid().n()).unwrap_or(0);
    if fields.iter().any(|f| f.grid().n() != n) {
        return Err(DkgError::Config("snapshot fields must share one grid".into()));
    }
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&(fields.len() as u32).to_le_bytes())?;
    for f in fields {
        for c in f.coeffs() {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Read a snapshot; fields get the default 2/3 dealias fraction.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<Vec<SpectralField>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(DkgError::Io("not a DKGF snapshot".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(DkgError::Io(format!("unsupported snapshot version {version}")));
    }
    let n = read_u32(&mut r)? as usize;
    let count = read_u32(&mut r)? as usize;
    if count == 0 {
        return Ok(Vec::new());
    }
    let grid = FourierGrid::new(n)?;
    let mut out = Vec::with_capacity(count);
    let mut buf = [0u8; 16];
    for _ in 0..count {
        let mut coeffs = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
            let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
            coeffs.push(Complex64::new(re, im));
        }
        out.push(SpectralField::from_coeffs(grid, coeffs)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Mode;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_exact() {
        let g = FourierGrid::new(8).unwrap();
        let f = SpectralField::single_mode(g, Mode::new(-4, 0), Complex64::new(1.5, -2.0)).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &[f]).unwrap();
        assert_eq!(&bytes[..4], b"DKGF");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &8u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &1u32.to_le_bytes());
        assert_eq!(bytes.len(), 16 + 64 * 16);
        // ξ = (−4, 0) sits at position 4 of the first row
        let off = 16 + 4 * 16;
        assert_eq!(&bytes[off..off + 8], &1.5f64.to_le_bytes());
        assert_eq!(&bytes[off + 8..off + 16], &(-2.0f64).to_le_bytes());
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(read_snapshot(&b"XXXX\x01\0\0\0"[..]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(vals in proptest::collection::vec(-1e3f64..1e3, 128), count in 1usize..3) {
            let g = FourierGrid::new(8).unwrap();
            let fields: Vec<_> = (0..count).map(|k| {
                SpectralField::from_coeffs(g, (0..64).map(|i| Complex64::new(vals[i] + k as f64, vals[64 + i])).collect()).unwrap()
            }).collect();
            let mut bytes = Vec::new();
            write_snapshot(&mut bytes, &fields).unwrap();
            prop_assert_eq!(read_snapshot(&bytes[..]).unwrap(), fields);
        }
    }
}

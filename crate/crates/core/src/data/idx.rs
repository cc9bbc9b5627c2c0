//! IDX container: two zero bytes, a type byte (0x08 = unsigned byte), a
//! dimension count, big-endian `u32` sizes, then row-major payload.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::{Error, Result};

const UBYTE: u8 = 0x08;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxTensor {
    pub dims: Vec<usize>,
    pub data: Vec<u8>,
}

impl IdxTensor {
    /// The big-endian magic number, e.g. `0x00000803` for image stacks.
    pub fn magic(&self) -> u32 {
        (u32::from(UBYTE) << 8) | self.dims.len() as u32
    }

    /// One row per leading index, remaining axes flattened, scaled by 1/255.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let rows = self.dims.first().copied().unwrap_or(1);
        let cols = if rows == 0 { 0 } else { self.data.len() / rows };
        DMatrix::from_row_iterator(rows, cols, self.data.iter().map(|&v| f64::from(v) / 255.0))
    }
}

pub fn parse_idx(bytes: &[u8]) -> Result<IdxTensor> {
    if bytes.len() < 4 {
        return Err(Error::Length {
            expected: 4,
            found: bytes.len(),
        });
    }
    if bytes[0] != 0 || bytes[1] != 0 {
        return Err(Error::Format(format!(
            "bad IDX magic {:02x} {:02x}",
            bytes[0], bytes[1]
        )));
    }
    if bytes[2] != UBYTE {
        return Err(Error::Format(format!("unsupported IDX element type 0x{:02x}", bytes[2])));
    }
    let ndims = bytes[3] as usize;
    let header = 4 + 4 * ndims;
    if bytes.len() < header {
        return Err(Error::Length {
            expected: header,
            found: bytes.len(),
        });
    }
    let dims: Vec<usize> = bytes[4..header]
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format("IDX dimensions overflow".into()))?;
    let expected = header + count;
    if bytes.len() < expected {
        return Err(Error::Length {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::Format(format!(
            "{} trailing bytes after IDX payload",
            bytes.len() - expected
        )));
    }
    Ok(IdxTensor {
        dims,
        data: bytes[header..].to_vec(),
    })
}

pub fn load_idx(path: impl AsRef<Path>) -> Result<IdxTensor> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_idx(&bytes)
}

pub fn write_idx(path: impl AsRef<Path>, t: &IdxTensor) -> Result<()> {
    let count: usize = t.dims.iter().product();
    if count != t.data.len() || t.dims.len() > 255 {
        return Err(Error::Shape(format!(
            "dims {:?} do not match {} data bytes",
            t.dims,
            t.data.len()
        )));
    }
    let mut out = vec![0, 0, UBYTE, t.dims.len() as u8];
    for &d in &t.dims {
        let d = u32::try_from(d).map_err(|_| Error::Shape(format!("IDX dimension {d} exceeds u32")))?;
        out.extend_from_slice(&d.to_be_bytes());
    }
    out.extend_from_slice(&t.data);
    let path = path.as_ref();
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Zero-pads each row, read as a `side × side` image, to `target × target`,
/// centering the original.
pub fn pad_images(images: &DMatrix<f64>, side: usize, target: usize) -> Result<DMatrix<f64>> {
    if images.ncols() != side * side || target < side {
        return Err(Error::Shape(format!(
            "cannot pad {}-wide rows as {side}x{side} images to {target}x{target}",
            images.ncols()
        )));
    }
    let off = (target - side) / 2;
    let mut out = DMatrix::zeros(images.nrows(), target * target);
    for r in 0..images.nrows() {
        for y in 0..side {
            for x in 0..side {
                out[(r, (y + off) * target + x + off)] = images[(r, y * side + x)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_fixture() {
        let bytes = [0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 128, 64];
        let t = parse_idx(&bytes).unwrap();
        assert_eq!(t.dims, vec![1, 2, 2]);
        assert_eq!(t.magic(), 0x0000_0803);
        let m = t.to_matrix();
        assert_eq!(m.shape(), (1, 4));
        assert_eq!(m.as_slice(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    }

    #[test]
    fn corrupt_inputs() {
        assert!(matches!(parse_idx(&[1, 0, 8, 1, 0, 0, 0, 0]), Err(Error::Format(_))));
        assert!(matches!(parse_idx(&[0, 0, 9, 1, 0, 0, 0, 0]), Err(Error::Format(_))));
        assert!(matches!(parse_idx(&[0, 0, 8, 1, 0, 0, 0, 3, 1, 2]), Err(Error::Length { .. })));
        assert!(matches!(parse_idx(&[0, 0, 8, 2, 0, 0]), Err(Error::Length { .. })));
        assert!(matches!(parse_idx(&[0, 0]), Err(Error::Length { .. })));
    }

    #[test]
    fn padding_centers() {
        let img = DMatrix::from_row_slice(1, 4, &[1.0, 2.0, 3.0, 4.0]);
        let p = pad_images(&img, 2, 4).unwrap();
        assert_eq!(p[(0, 5)], 1.0);
        assert_eq!(p[(0, 10)], 4.0);
        assert_eq!(p.sum(), 10.0);
        assert!(pad_images(&img, 3, 4).is_err());
    }
}

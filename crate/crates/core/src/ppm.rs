//! Binary PPM (P6) images of label slices.

use std::path::Path;

use crate::ergodic::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Palette {
    pub torus0: [u8; 3],
    pub torus1: [u8; 3],
    pub undecided: [u8; 3],
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            torus0: [30, 90, 200],
            torus1: [200, 60, 30],
            undecided: [128, 128, 128],
        }
    }
}

impl Palette {
    pub fn color(&self, l: Label) -> [u8; 3] {
        match l {
            Label::Torus0 => self.torus0,
            Label::Torus1 => self.torus1,
            Label::Undecided => self.undecided,
        }
    }
}

/// Encodes a row-major `width × height` slice, first row at the top.
pub fn encode_ppm(
    width: usize,
    height: usize,
    labels: &[Label],
    palette: &Palette,
) -> Result<Vec<u8>> {
    if width == 0 || height == 0 || labels.is_empty() {
        return Err(Error::EmptySlice);
    }
    if labels.len() != width * height {
        return Err(Error::Range("slice dimensions".into()));
    }
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.reserve(3 * labels.len());
    for &l in labels {
        out.extend_from_slice(&palette.color(l));
    }
    Ok(out)
}

pub fn write_ppm(
    path: &Path,
    width: usize,
    height: usize,
    labels: &[Label],
    palette: &Palette,
) -> Result<()> {
    let bytes = encode_ppm(width, height, labels, palette)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_pixel_slice() {
        let b = encode_ppm(2, 1, &[Label::Torus0, Label::Torus1], &Palette::default()).unwrap();
        let mut want = b"P6\n2 1\n255\n".to_vec();
        want.extend_from_slice(&[0x1E, 0x5A, 0xC8, 0xC8, 0x3C, 0x1E]);
        assert_eq!(b, want);
    }

    #[test]
    fn empty_and_gray() {
        assert!(matches!(
            encode_ppm(0, 0, &[], &Palette::default()),
            Err(Error::EmptySlice)
        ));
        let b = encode_ppm(3, 2, &[Label::Undecided; 6], &Palette::default()).unwrap();
        assert!(b[11..].iter().all(|&v| v == 128));
        assert_eq!(b.len(), 11 + 18);
    }
}

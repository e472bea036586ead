//! Portable float map (PFM) reader and writer.
//!
//! `PF` holds three channels, `Pf` one. The scale line carries the byte
//! order: negative means little-endian. Scanlines are stored bottom to top.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Planar float image: one `[row, col]` grid per channel, row 0 at the top.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatImage {
    pub channels: Vec<Array2<f64>>,
}

impl FloatImage {
    pub fn new(channels: Vec<Array2<f64>>) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::InvalidArgument("image needs at least one channel".into()))?;
        if channels.iter().any(|c| c.dim() != first.dim()) {
            return Err(Error::ShapeMismatch("image channels differ in shape".into()));
        }
        Ok(Self { channels })
    }

    pub fn gray(grid: Array2<f64>) -> Self {
        Self { channels: vec![grid] }
    }

    pub fn dim(&self) -> (usize, usize) {
        self.channels[0].dim()
    }
}

fn malformed(reason: impl Into<String>) -> Error {
    Error::Malformed { format: "PFM", reason: reason.into() }
}

pub fn decode_pfm(bytes: &[u8]) -> Result<FloatImage> {
    // Header: three whitespace-separated tokens after the magic, then one
    // whitespace byte before the raster.
    let mut pos = 0usize;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(malformed("truncated header"));
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| malformed("non-ASCII header"))?);
    }
    if pos >= bytes.len() {
        return Err(malformed("missing raster"));
    }
    pos += 1;

    let nch = match tokens[0] {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(malformed(format!("unknown magic {other:?}"))),
    };
    let width: usize = tokens[1].parse().map_err(|_| malformed(format!("bad width {:?}", tokens[1])))?;
    let height: usize = tokens[2].parse().map_err(|_| malformed(format!("bad height {:?}", tokens[2])))?;
    let scale: f64 = tokens[3].parse().map_err(|_| malformed(format!("bad scale {:?}", tokens[3])))?;
    if width == 0 || height == 0 {
        return Err(malformed("zero dimension"));
    }
    if scale == 0.0 || !scale.is_finite() {
        return Err(malformed("scale must be finite and nonzero"));
    }
    let little = scale < 0.0;
    let raster = &bytes[pos..];
    let expected = width * height * nch * 4;
    if raster.len() < expected {
        return Err(malformed(format!("raster has {} bytes, expected {expected}", raster.len())));
    }

    let mut channels = vec![Array2::<f64>::zeros((height, width)); nch];
    for (i, chunk) in raster[..expected].chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        let c = i % nch;
        let px = i / nch;
        let (file_row, col) = (px / width, px % width);
        channels[c][[height - 1 - file_row, col]] = v as f64;
    }
    Ok(FloatImage { channels })
}

/// Encode as little-endian PFM. One channel writes `Pf`, three write `PF`.
pub fn encode_pfm(image: &FloatImage) -> Result<Vec<u8>> {
    let nch = image.channels.len();
    let magic = match nch {
        1 => "Pf",
        3 => "PF",
        n => return Err(Error::InvalidArgument(format!("PFM stores 1 or 3 channels, got {n}"))),
    };
    let (h, w) = image.dim();
    let mut out = format!("{magic}\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * nch * 4);
    for r in (0..h).rev() {
        for c in 0..w {
            for ch in &image.channels {
                out.extend_from_slice(&(ch[[r, c]] as f32).to_le_bytes());
            }
        }
    }
    Ok(out)
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<FloatImage> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_pfm(&bytes)
}

pub fn write_pfm(path: impl AsRef<Path>, image: &FloatImage) -> Result<()> {
    let bytes = encode_pfm(image)?;
    std::fs::File::create(path)?.write_all(&bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_round_trip_is_exact_for_f32_values() {
        let g = Array2::from_shape_fn((3, 5), |(r, c)| (r as f32 * 0.37 - c as f32 * 1.25) as f64);
        let img = FloatImage::gray(g);
        assert_eq!(decode_pfm(&encode_pfm(&img).unwrap()).unwrap(), img);
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(matches!(decode_pfm(b"P6\n1 1\n-1.0\n\0\0\0\0"), Err(Error::Malformed { .. })));
        assert!(matches!(decode_pfm(b"Pf\n2 1\n-1.0\n\0\0\0\0"), Err(Error::Malformed { .. })));
        assert!(matches!(decode_pfm(b"Pf\nx 1\n-1.0\n\0\0\0\0"), Err(Error::Malformed { .. })));
        assert!(matches!(decode_pfm(b"Pf\n1 1\n0\n\0\0\0\0"), Err(Error::Malformed { .. })));
        assert!(matches!(decode_pfm(b"Pf\n1"), Err(Error::Malformed { .. })));
    }

    #[test]
    fn two_channels_cannot_be_written() {
        let z = Array2::zeros((1, 1));
        let img = FloatImage::new(vec![z.clone(), z]).unwrap();
        assert!(encode_pfm(&img).is_err());
    }
}

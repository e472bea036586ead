//! `HBIN1` bit-packed binary hologram container.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 5    | magic `HBIN1`                           |
//! | 5      | 4    | version (1)                             |
//! | 9      | 4    | width                                   |
//! | 13     | 4    | height                                  |
//! | 17     | 4    | frames per channel `T`                  |
//! | 21     | 4    | channels                                |
//! | 25     | 1    | bit order (0 = least significant first) |
//!
//! The payload follows: channel-major, then frame, then row-major rows.
//! Each row is packed LSB-first and padded to a whole byte, so the payload
//! is `channels * T * height * ceil(width / 8)` bytes.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"HBIN1";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 26;
pub const BIT_ORDER_LSB_FIRST: u8 = 0;

/// Binary SLM frames for every channel. `frames[c][t]` holds values in
/// `{0, 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryHologram {
    pub width: usize,
    pub height: usize,
    pub frames: Vec<Vec<Array2<f64>>>,
}

impl BinaryHologram {
    pub fn new(frames: Vec<Vec<Array2<f64>>>) -> Result<Self> {
        let first = frames
            .first()
            .and_then(|c| c.first())
            .ok_or_else(|| Error::InvalidArgument("hologram needs at least one frame".into()))?;
        let (height, width) = first.dim();
        let t = frames[0].len();
        for (c, ch) in frames.iter().enumerate() {
            if ch.len() != t {
                return Err(Error::ShapeMismatch(format!(
                    "channel {c} has {} frames, channel 0 has {t}",
                    ch.len()
                )));
            }
            if ch.iter().any(|f| f.dim() != (height, width)) {
                return Err(Error::ShapeMismatch(format!("channel {c} has a frame of the wrong shape")));
            }
        }
        Ok(Self { width, height, frames })
    }

    pub fn channels(&self) -> usize {
        self.frames.len()
    }

    pub fn num_frames(&self) -> usize {
        self.frames[0].len()
    }

    pub fn row_bytes(&self) -> usize {
        self.width.div_ceil(8)
    }

    pub fn payload_len(&self) -> usize {
        payload_len(self.width, self.height, self.num_frames(), self.channels())
    }
}

pub fn payload_len(width: usize, height: usize, frames: usize, channels: usize) -> usize {
    channels * frames * height * width.div_ceil(8)
}

pub fn encode_hologram(holo: &BinaryHologram) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER_LEN + holo.payload_len());
    out.extend_from_slice(MAGIC);
    for v in [VERSION, holo.width as u32, holo.height as u32, holo.num_frames() as u32, holo.channels() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(BIT_ORDER_LSB_FIRST);
    let row_bytes = holo.row_bytes();
    for ch in &holo.frames {
        for (t, frame) in ch.iter().enumerate() {
            for (r, row) in frame.outer_iter().enumerate() {
                let mut packed = vec![0u8; row_bytes];
                for (c, &v) in row.iter().enumerate() {
                    let bit = if v == 1.0 {
                        1u8
                    } else if v == 0.0 {
                        0u8
                    } else {
                        return Err(Error::NonBinary { frame: t, row: r, col: c, value: v });
                    };
                    packed[c / 8] |= bit << (c % 8);
                }
                out.extend_from_slice(&packed);
            }
        }
    }
    Ok(out)
}

pub fn decode_hologram(bytes: &[u8]) -> Result<BinaryHologram> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic { expected: "HBIN1" });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Malformed { format: "HBIN1", reason: "truncated header".into() });
    }
    let word = |i: usize| {
        let o = 5 + 4 * i;
        u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]])
    };
    let version = word(0);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let (width, height, frames, channels) = (word(1) as usize, word(2) as usize, word(3) as usize, word(4) as usize);
    if bytes[25] != BIT_ORDER_LSB_FIRST {
        return Err(Error::Malformed { format: "HBIN1", reason: format!("unknown bit order tag {}", bytes[25]) });
    }
    if width == 0 || height == 0 || frames == 0 || channels == 0 {
        return Err(Error::Malformed { format: "HBIN1", reason: "zero dimension in header".into() });
    }
    let expected = payload_len(width, height, frames, channels);
    let found = bytes.len() - HEADER_LEN;
    if found != expected {
        return Err(Error::PayloadLength { expected, found });
    }
    let row_bytes = width.div_ceil(8);
    let mut payload = bytes[HEADER_LEN..].chunks_exact(row_bytes);
    let mut all = Vec::with_capacity(channels);
    for _ in 0..channels {
        let mut ch = Vec::with_capacity(frames);
        for _ in 0..frames {
            let mut f = Array2::zeros((height, width));
            for r in 0..height {
                let row = payload.next().expect("length checked above");
                for c in 0..width {
                    f[[r, c]] = ((row[c / 8] >> (c % 8)) & 1) as f64;
                }
            }
            ch.push(f);
        }
        all.push(ch);
    }
    BinaryHologram::new(all)
}

pub fn write_hologram(path: impl AsRef<Path>, holo: &BinaryHologram) -> Result<()> {
    std::fs::write(path, encode_hologram(holo)?)?;
    Ok(())
}

pub fn read_hologram(path: impl AsRef<Path>) -> Result<BinaryHologram> {
    decode_hologram(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BinaryHologram {
        let f = Array2::from_shape_fn((3, 11), |(r, c)| ((r * 7 + c * 3) % 2) as f64);
        BinaryHologram::new(vec![vec![f.clone(), f.mapv(|v| 1.0 - v)]]).unwrap()
    }

    #[test]
    fn bit_order_is_lsb_first() {
        let mut f = Array2::zeros((1, 9));
        f[[0, 0]] = 1.0;
        f[[0, 8]] = 1.0;
        let bytes = encode_hologram(&BinaryHologram::new(vec![vec![f]]).unwrap()).unwrap();
        assert_eq!(&bytes[HEADER_LEN..], &[0b0000_0001, 0b0000_0001]);
    }

    #[test]
    fn all_zero_file_size() {
        let h = BinaryHologram::new(vec![vec![Array2::zeros((5, 13)); 4]; 3]).unwrap();
        let bytes = encode_hologram(&h).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 3 * 4 * 5 * 2);
        assert!(bytes[HEADER_LEN..].iter().all(|&b| b == 0));
    }

    #[test]
    fn error_paths() {
        let mut bytes = encode_hologram(&sample()).unwrap();
        assert!(matches!(decode_hologram(b"HBIN2xxxxxxxxxxxxxxxxxxxxxxxxx"), Err(Error::BadMagic { .. })));
        let truncated = &bytes[..bytes.len() - 1];
        assert!(matches!(decode_hologram(truncated), Err(Error::PayloadLength { .. })));
        bytes[5] = 9;
        assert!(matches!(decode_hologram(&bytes), Err(Error::UnsupportedVersion(9))));

        let mut bad = Array2::zeros((2, 2));
        bad[[1, 0]] = 0.5;
        let err = encode_hologram(&BinaryHologram::new(vec![vec![bad]]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NonBinary { row: 1, col: 0, .. }));
    }

    #[test]
    fn round_trip() {
        let h = sample();
        assert_eq!(decode_hologram(&encode_hologram(&h).unwrap()).unwrap(), h);
    }
}

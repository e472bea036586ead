//! 8-bit and 16-bit PNG helpers.
//!
//! Gamma is applied only on 8-bit export for viewing. Metrics always run on
//! the linear float data before any export.

use std::path::Path;

use image::{ImageBuffer, Luma, Rgb};
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::io::pfm::FloatImage;

pub const DISPLAY_GAMMA: f64 = 2.2;

/// Map a linear value in [0, 1] to an 8-bit display code.
pub fn encode_display(v: f64) -> u8 {
    let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
    (v.powf(1.0 / DISPLAY_GAMMA) * 255.0).round() as u8
}

/// Write a 1- or 3-channel linear image as an 8-bit gamma-encoded PNG.
/// Values are divided by `white` first.
pub fn write_png8(path: impl AsRef<Path>, image: &FloatImage, white: f64) -> Result<()> {
    let (h, w) = image.dim();
    let path = path.as_ref();
    let scale = if white > 0.0 { 1.0 / white } else { 1.0 };
    let save_err = |e: image::ImageError| Error::Image { path: path.display().to_string(), source: e };
    match image.channels.len() {
        1 => {
            let buf = ImageBuffer::<Luma<u8>, _>::from_fn(w as u32, h as u32, |x, y| {
                Luma([encode_display(image.channels[0][[y as usize, x as usize]] * scale)])
            });
            buf.save(path).map_err(save_err)
        }
        3 => {
            let buf = ImageBuffer::<Rgb<u8>, _>::from_fn(w as u32, h as u32, |x, y| {
                let px = |c: usize| encode_display(image.channels[c][[y as usize, x as usize]] * scale);
                Rgb([px(0), px(1), px(2)])
            });
            buf.save(path).map_err(save_err)
        }
        n => Err(Error::InvalidArgument(format!("PNG export needs 1 or 3 channels, got {n}"))),
    }
}

/// Read any PNG as planar floats normalized to [0, 1] by the bit depth's
/// maximum code. No gamma is removed.
pub fn read_png(path: impl AsRef<Path>) -> Result<FloatImage> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| Error::Image { path: path.display().to_string(), source: e })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let channels = match img {
        image::DynamicImage::ImageLuma8(b) => {
            vec![Array2::from_shape_fn((h, w), |(r, c)| b.get_pixel(c as u32, r as u32)[0] as f64 / 255.0)]
        }
        image::DynamicImage::ImageLuma16(b) => {
            vec![Array2::from_shape_fn((h, w), |(r, c)| b.get_pixel(c as u32, r as u32)[0] as f64 / 65535.0)]
        }
        other => {
            let rgb = other.to_rgb32f();
            (0..3)
                .map(|ch| Array2::from_shape_fn((h, w), |(r, c)| rgb.get_pixel(c as u32, r as u32)[ch] as f64))
                .collect()
        }
    };
    FloatImage::new(channels)
}

/// Write a single-channel grid in [0, 1] as a linear 16-bit PNG (used for
/// depth maps).
pub fn write_png16(path: impl AsRef<Path>, grid: &Array2<f64>) -> Result<()> {
    let (h, w) = grid.dim();
    let path = path.as_ref();
    let buf = ImageBuffer::<Luma<u16>, _>::from_fn(w as u32, h as u32, |x, y| {
        Luma([(grid[[y as usize, x as usize]].clamp(0.0, 1.0) * 65535.0).round() as u16])
    });
    buf.save(path).map_err(|e| Error::Image { path: path.display().to_string(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_encoding_applies_gamma() {
        assert_eq!(encode_display(0.0), 0);
        assert_eq!(encode_display(1.0), 255);
        assert_eq!(encode_display(2.0), 255);
        assert_eq!(encode_display(f64::NAN), 0);
        // 0.5^(1/2.2) = 0.7297
        assert_eq!(encode_display(0.5), 186);
    }
}

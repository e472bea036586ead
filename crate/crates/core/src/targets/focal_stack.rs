//! Focal stacks from RGB-D layers (defocus blur with occlusion-aware
//! compositing) and from light fields (shift-and-add refocusing).

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::optics::{OpticalConfig, PlaneDepth};
use crate::targets::lightfield::LightField;
use crate::targets::masks::closest_distance_masks;
use crate::targets::RgbdTarget;
use crate::wave::apply_shift_phase;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    FromRgbd,
    FromLightField,
}

/// Single-channel focal stack of intensities.
#[derive(Clone, Debug, PartialEq)]
pub struct FocalStack {
    pub slices: Vec<Array2<f64>>,
    /// Focus depth of each slice (diopters).
    pub planes: Vec<f64>,
    pub provenance: Provenance,
}

impl FocalStack {
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }
}

/// Blur radius in pixels for a layer `delta_diopters` away from focus, seen
/// through a pupil of diameter `pupil_diameter` (m).
pub fn blur_radius_px(pupil_diameter: f64, delta_diopters: f64, focal_length: f64, pitch: f64) -> f64 {
    0.5 * pupil_diameter * delta_diopters.abs() * focal_length / pitch
}

/// Normalized disk kernel of the given radius, `(2R+1)^2` samples.
pub fn disk_kernel(radius: f64) -> Array2<f64> {
    let r = radius.floor() as isize;
    let n = (2 * r + 1) as usize;
    let mut k = Array2::from_shape_fn((n, n), |(i, j)| {
        let (y, x) = (i as isize - r, j as isize - r);
        if ((x * x + y * y) as f64) <= radius * radius {
            1.0
        } else {
            0.0
        }
    });
    let sum = k.sum();
    k /= sum;
    k
}

/// Convolve with a disk of the given radius, replicating edge pixels.
/// Radii below half a pixel leave the image untouched.
pub fn disk_blur(image: &Array2<f64>, radius: f64) -> Array2<f64> {
    if radius < 0.5 {
        return image.clone();
    }
    let kernel = disk_kernel(radius);
    let r = (kernel.nrows() / 2) as isize;
    let (h, w) = image.dim();
    let (ph, pw) = (h + 2 * r as usize, w + 2 * r as usize);
    let fft = Fft2::new(ph, pw);
    let mut a = Array2::from_shape_fn((ph, pw), |(i, j)| {
        let y = (i as isize - r).clamp(0, h as isize - 1) as usize;
        let x = (j as isize - r).clamp(0, w as isize - 1) as usize;
        Complex64::new(image[[y, x]], 0.0)
    });
    let mut kg = Array2::<Complex64>::zeros((ph, pw));
    for ((i, j), &v) in kernel.indexed_iter() {
        let y = (i as isize - r).rem_euclid(ph as isize) as usize;
        let x = (j as isize - r).rem_euclid(pw as isize) as usize;
        kg[[y, x]] = Complex64::new(v, 0.0);
    }
    fft.forward(&mut a);
    fft.forward(&mut kg);
    a *= &kg;
    fft.inverse(&mut a);
    a.slice(s![r..r + h as isize, r..r + w as isize]).mapv(|v| v.re)
}

/// Focal stack per channel from an RGB-D target. The image is split into
/// nearest-plane layers; each layer and its occupancy matte get the same
/// defocus blur, and layers are composited far to near.
pub fn focal_stack_from_rgbd(
    target: &RgbdTarget,
    planes: &[PlaneDepth],
    pupil_diameter: f64,
    cfg: &OpticalConfig,
) -> Result<Vec<FocalStack>> {
    if !(pupil_diameter > 0.0) {
        return Err(Error::InvalidArgument(format!("pupil diameter must be positive, got {pupil_diameter}")));
    }
    let diopters: Vec<f64> = planes.iter().map(|p| p.diopters).collect();
    let masks = closest_distance_masks(&target.depth, &diopters)?;
    let f = cfg.eyepiece_focal_length;
    let p = cfg.pixel_pitch;
    let out = (0..target.channels())
        .map(|c| {
            let intensity = target.intensity(c);
            let layers: Vec<Array2<f64>> = masks.masks.iter().map(|m| &intensity * m).collect();
            let slices = diopters
                .iter()
                .map(|&focus| {
                    let mut acc = Array2::<f64>::zeros(target.dim());
                    for (k, &dk) in diopters.iter().enumerate() {
                        if masks.masks[k].iter().all(|&v| v == 0.0) {
                            continue;
                        }
                        let radius = blur_radius_px(pupil_diameter, focus - dk, f, p);
                        let matte = disk_blur(&masks.masks[k], radius);
                        let layer = disk_blur(&layers[k], radius);
                        acc.zip_mut_with(&matte, |a, &m| *a *= 1.0 - m);
                        acc += &layer;
                    }
                    acc
                })
                .collect();
            FocalStack { slices, planes: diopters.clone(), provenance: Provenance::FromRgbd }
        })
        .collect();
    Ok(out)
}

/// Shift-and-add refocusing. Each view is translated by
/// `tan(u) * (z_i - z_wrp) / pitch` pixels per axis and the views are
/// averaged with uniform weights. Shifts are circular and sub-pixel.
pub fn focal_stack_from_lf(lf: &LightField, planes: &[PlaneDepth], cfg: &OpticalConfig) -> FocalStack {
    focal_stack_from_lf_with_pitch(lf, planes, cfg.pixel_pitch)
}

/// [`focal_stack_from_lf`] for views sampled at an arbitrary pitch.
pub fn focal_stack_from_lf_with_pitch(lf: &LightField, planes: &[PlaneDepth], pitch: f64) -> FocalStack {
    let (rows, cols) = lf.dim();
    let fft = Fft2::new(rows, cols);
    let spectra: Vec<Array2<Complex64>> = lf
        .views
        .iter()
        .map(|v| {
            let mut a = v.mapv(|x| Complex64::new(x, 0.0));
            fft.forward(&mut a);
            a
        })
        .collect();
    let w = 1.0 / lf.num_views() as f64;
    let slices = planes
        .iter()
        .map(|plane| {
            let mut acc = Array2::<Complex64>::zeros((rows, cols));
            for j in 0..lf.n_v {
                for i in 0..lf.n_u {
                    let mut spec = spectra[j * lf.n_u + i].clone();
                    let dx = lf.angles_x[i].tan() * plane.offset_from_wrp / pitch;
                    let dy = lf.angles_y[j].tan() * plane.offset_from_wrp / pitch;
                    apply_shift_phase(&mut spec, dx, dy);
                    acc.scaled_add(Complex64::new(w, 0.0), &spec);
                }
            }
            fft.inverse(&mut acc);
            acc.mapv(|v| v.re)
        })
        .collect();
    FocalStack {
        slices,
        planes: planes.iter().map(|p| p.diopters).collect(),
        provenance: Provenance::FromLightField,
    }
}

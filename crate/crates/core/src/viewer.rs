//! What an eye at some position in the eyebox sees.
//!
//! The eyebox lives in the back focal plane of the eyepiece, so a pupil
//! sample at physical position `xi` collects the spatial frequency
//! `xi / (lambda f)` of the field at the WRP. Pupil coordinates are given
//! relative to the eyebox center and normalized by the eyebox width of the
//! reference (shortest) wavelength.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::fftfreq;
use crate::optics::{display_geometry, OpticalConfig};
use crate::targets::lightfield::{StftParams, StftPlan};
use crate::wave::{FieldStack, Propagator};

/// Stiles-Crawford coefficient (m^-2).
pub const SCE_COEFFICIENT: f64 = 2.5e4;

/// Pupils whose overlap with the eyebox is below this fraction of their
/// area are reported as vignetted.
pub const VIGNETTING_THRESHOLD: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Apodization {
    DiffractionLimited,
    /// `10^(-coefficient r^2)` with `r` in metres.
    StilesCrawford { coefficient: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PupilState {
    /// Pupil center, normalized by the eyebox width, relative to the
    /// eyebox center.
    pub center: (f64, f64),
    /// Pupil diameter, same normalization.
    pub diameter: f64,
    pub apodization: Apodization,
    /// Accommodation distance (diopters).
    pub focal_diopters: f64,
    /// Peak transmission `A_o`.
    pub transmission: f64,
}

impl PupilState {
    pub fn new(center: (f64, f64), diameter: f64, focal_diopters: f64) -> Result<Self> {
        let s = Self {
            center,
            diameter,
            apodization: Apodization::DiffractionLimited,
            focal_diopters,
            transmission: 1.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_sce(mut self, coefficient: f64) -> Result<Self> {
        self.apodization = Apodization::StilesCrawford { coefficient };
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return Err(Error::InvalidArgument(format!("pupil diameter must be positive, got {}", self.diameter)));
        }
        if let Apodization::StilesCrawford { coefficient } = self.apodization {
            if !(coefficient >= 0.0 && coefficient.is_finite()) {
                return Err(Error::InvalidArgument(format!("SCE coefficient must be >= 0, got {coefficient}")));
            }
        }
        if !(self.center.0.is_finite() && self.center.1.is_finite() && self.focal_diopters.is_finite()) {
            return Err(Error::InvalidArgument("pupil center and focal state must be finite".into()));
        }
        if !(self.transmission >= 0.0) {
            return Err(Error::InvalidArgument("transmission must be >= 0".into()));
        }
        Ok(())
    }
}

/// Physical sample positions (m) of the pupil plane, measured from the
/// optical axis, plus the eyebox frame used to place normalized pupils.
#[derive(Clone, Debug, PartialEq)]
pub struct PupilGrid {
    /// Horizontal position of every column.
    pub xs: Vec<f64>,
    /// Vertical position of every row.
    pub ys: Vec<f64>,
    /// Normalization width (m).
    pub eyebox_width: f64,
    /// Eyebox center (m) relative to the optical axis.
    pub eyebox_center: (f64, f64),
}

impl PupilGrid {
    /// Pupil positions of the FFT bins of a `shape` grid with sample pitch
    /// `pitch`, in FFT order.
    pub fn for_spectrum(cfg: &OpticalConfig, shape: (usize, usize), pitch: (f64, f64), wavelength: f64) -> Result<Self> {
        let (width, center) = eyebox_frame(cfg)?;
        let lf = wavelength * cfg.eyepiece_focal_length;
        Ok(Self {
            xs: fftfreq(shape.1, pitch.0).into_iter().map(|f| f * lf).collect(),
            ys: fftfreq(shape.0, pitch.1).into_iter().map(|f| f * lf).collect(),
            eyebox_width: width,
            eyebox_center: center,
        })
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.ys.len(), self.xs.len())
    }

    /// Physical pupil center and radius.
    pub fn place(&self, state: &PupilState) -> ((f64, f64), f64) {
        let w = self.eyebox_width;
        (
            (self.eyebox_center.0 + state.center.0 * w, self.eyebox_center.1 + state.center.1 * w),
            0.5 * state.diameter * w,
        )
    }
}

/// Eyebox width of the reference channel and the eyebox center. With the
/// sideband filter only `fy >= 0` carries energy, so the center moves up by
/// half the (halved) eyebox height.
fn eyebox_frame(cfg: &OpticalConfig) -> Result<(f64, (f64, f64))> {
    let g = display_geometry(cfg)?;
    let cy = if cfg.sideband { 0.5 * g.eyebox.1 } else { 0.0 };
    Ok((g.eyebox.0, (0.0, cy)))
}

/// `A = A_o 10^(-p r^2)` inside the pupil, 0 outside.
pub fn pupil_aperture(state: &PupilState, grid: &PupilGrid) -> Array2<f64> {
    let ((cx, cy), radius) = grid.place(state);
    let r2max = radius * radius;
    let p = match state.apodization {
        Apodization::DiffractionLimited => 0.0,
        Apodization::StilesCrawford { coefficient } => coefficient,
    };
    Array2::from_shape_fn(grid.dim(), |(r, c)| {
        let dx = grid.xs[c] - cx;
        let dy = grid.ys[r] - cy;
        let r2 = dx * dx + dy * dy;
        if r2 > r2max {
            0.0
        } else if p == 0.0 {
            state.transmission
        } else {
            state.transmission * 10f64.powf(-p * r2)
        }
    })
}

/// Fraction of the pupil disk that lies inside the channel's eyebox,
/// estimated on a 201 x 201 grid over the pupil's bounding box.
pub fn eyebox_overlap(cfg: &OpticalConfig, state: &PupilState, wavelength: f64) -> Result<f64> {
    let (width, center) = eyebox_frame(cfg)?;
    let half = wavelength * cfg.eyepiece_focal_length / (2.0 * cfg.pixel_pitch);
    let (y_lo, y_hi) = if cfg.sideband { (0.0, half) } else { (-half, half) };
    let (cx, cy) = (center.0 + state.center.0 * width, center.1 + state.center.1 * width);
    let radius = 0.5 * state.diameter * width;
    const N: usize = 201;
    let (mut inside, mut total) = (0usize, 0usize);
    for i in 0..N {
        let y = cy + radius * (2.0 * i as f64 / (N - 1) as f64 - 1.0);
        for j in 0..N {
            let x = cx + radius * (2.0 * j as f64 / (N - 1) as f64 - 1.0);
            if (x - cx).powi(2) + (y - cy).powi(2) > radius * radius {
                continue;
            }
            total += 1;
            if x.abs() <= half && (y_lo..=y_hi).contains(&y) {
                inside += 1;
            }
        }
    }
    Ok(inside as f64 / total.max(1) as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetinalImage {
    pub intensity: Array2<f64>,
    pub focal_diopters: f64,
    pub pupil: PupilState,
    pub vignetted: bool,
}

/// Time-averaged retinal intensity of one color channel.
///
/// Each frame is propagated to the WRP, filtered by the pupil in the
/// Fourier plane of the eyepiece and refocused to the accommodation
/// distance with the exact angular-spectrum phase, all in one padded
/// spectrum.
pub fn retinal_image(stack: &FieldStack, cfg: &OpticalConfig, state: &PupilState) -> Result<RetinalImage> {
    state.validate()?;
    let shape = stack.dim();
    let lambda = stack.wavelength();
    let overlap = eyebox_overlap(cfg, state, lambda)?;
    if overlap < VIGNETTING_THRESHOLD {
        return Ok(RetinalImage {
            intensity: Array2::zeros(shape),
            focal_diopters: state.focal_diopters,
            pupil: *state,
            vignetted: true,
        });
    }
    let pitch = stack.pitch();
    let prop = Propagator::new(shape, pitch, lambda, true);
    let grid = PupilGrid::for_spectrum(cfg, prop.padded_shape(), (pitch.x, pitch.y), lambda)?;
    let aperture = pupil_aperture(state, &grid);
    let to_wrp = prop.kernel(cfg.wrp_distance, cfg.sideband);
    let mut kernel = prop.kernel(cfg.offset_at_diopters(state.focal_diopters), false);
    kernel.transfer.zip_mut_with(&to_wrp.transfer, |k, w| *k *= w);
    kernel.transfer.zip_mut_with(&aperture, |k, &a| *k *= a);

    let n = stack.len() as f64;
    let intensity = stack
        .frames()
        .par_iter()
        .map(|f| prop.propagate(&f.grid, &kernel).mapv(|v| v.norm_sqr()))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Array2::<f64>::zeros(shape), |acc, i| acc + i)
        / n;
    Ok(RetinalImage { intensity, focal_diopters: state.focal_diopters, pupil: *state, vignetted: false })
}

/// Energy reaching each STFT view of the WRP field, summed over frames and
/// normalized to a maximum of 1. Rows index vertical views, columns
/// horizontal views. An all-zero stack gives all-zero tiles.
pub fn eyebox_energy_tiles(stack: &FieldStack, cfg: &OpticalConfig, params: StftParams) -> Result<Array2<f64>> {
    let shape = stack.dim();
    let plan = StftPlan::new(shape, params)?;
    let prop = Propagator::new(shape, stack.pitch(), stack.wavelength(), true);
    let kernel = prop.kernel(cfg.wrp_distance, cfg.sideband);
    let per_frame = stack
        .frames()
        .par_iter()
        .map(|f| {
            let wrp: Array2<Complex64> = prop.propagate(&f.grid, &kernel);
            let coeffs = plan.analyze(&wrp)?;
            Ok(plan.view_intensities(&coeffs).iter().map(|v| v.sum()).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut energy = vec![0.0; plan.num_views()];
    for e in &per_frame {
        for (a, b) in energy.iter_mut().zip(e) {
            *a += b;
        }
    }
    let max = energy.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        energy.iter_mut().for_each(|e| *e /= max);
    }
    let (nu, nv) = params.n_views;
    Ok(Array2::from_shape_vec((nv, nu), energy).expect("view count matches the plan"))
}

/// `min / max` of a tile grid; 0 when every tile is 0.
pub fn tile_uniformity(tiles: &Array2<f64>) -> f64 {
    let max = tiles.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    tiles.iter().cloned().fold(f64::INFINITY, f64::min) / max
}

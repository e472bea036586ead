//! Supervision targets: RGB-D scenes, closest-distance masks, focal stacks
//! and light fields.

pub mod assets;
pub mod focal_stack;
pub mod lightfield;
pub mod masks;
pub mod synthetic;

use ndarray::Array2;

use crate::error::{Error, Result};

pub use focal_stack::{focal_stack_from_lf, focal_stack_from_rgbd, FocalStack, Provenance};
pub use lightfield::{stft_light_field, LightField, StftParams, StftPlan};
pub use masks::{closest_distance_masks, MaskSet};

/// Per-channel amplitude image with a depth map in diopters.
#[derive(Clone, Debug, PartialEq)]
pub struct RgbdTarget {
    /// Amplitude in [0, 1], one grid per channel.
    pub amplitude: Vec<Array2<f64>>,
    pub depth: Array2<f64>,
}

impl RgbdTarget {
    pub fn new(amplitude: Vec<Array2<f64>>, depth: Array2<f64>, d_ncp: f64) -> Result<Self> {
        if amplitude.is_empty() {
            return Err(Error::InvalidArgument("RGB-D target needs at least one channel".into()));
        }
        if amplitude.iter().any(|a| a.dim() != depth.dim()) {
            return Err(Error::ShapeMismatch("amplitude and depth differ in shape".into()));
        }
        if amplitude.iter().flatten().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidArgument("amplitude must lie in [0, 1]".into()));
        }
        let tol = 1e-9 * d_ncp.max(1.0);
        if depth.iter().any(|&d| !(d >= -tol && d <= d_ncp + tol)) {
            return Err(Error::InvalidArgument(format!("depth must lie in [0, {d_ncp}] diopters")));
        }
        Ok(Self { amplitude, depth })
    }

    pub fn dim(&self) -> (usize, usize) {
        self.depth.dim()
    }

    pub fn channels(&self) -> usize {
        self.amplitude.len()
    }

    /// Intensity of one channel.
    pub fn intensity(&self, channel: usize) -> Array2<f64> {
        self.amplitude[channel].mapv(|a| a * a)
    }
}

/// Amplitude of an intensity grid, with negative ringing clipped.
pub fn amplitude_of(intensity: &Array2<f64>) -> Array2<f64> {
    intensity.mapv(|v| v.max(0.0).sqrt())
}

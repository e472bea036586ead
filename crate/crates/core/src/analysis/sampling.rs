//! How many light-field views a depth range needs, and the reverse.
//!
//! Bandwidth `B_x` is the full bandwidth in cycles/m, twice the highest
//! spatial frequency. With this convention 30 cpd over 3 D behind a 40 mm
//! eyepiece at 532 nm needs about 8 horizontal views.

use serde::Serialize;

use crate::error::{Error, Result};

/// Full bandwidth (cycles/m) at the display for an angular resolution of
/// `cpd` cycles/degree behind an eyepiece of focal length `f`.
pub fn bandwidth_from_cpd(cpd: f64, focal_length: f64) -> f64 {
    2.0 * cpd * (180.0 / std::f64::consts::PI) / focal_length
}

/// Half the metric depth volume, `f^2 D / (2 (f D + 1))`.
pub fn half_depth_for_range(d_max: f64, focal_length: f64) -> f64 {
    focal_length * focal_length * d_max / (2.0 * (focal_length * d_max + 1.0))
}

/// Dioptric range spanned by a metric volume of `2 z_o` whose far end sits
/// at the eyepiece focal plane.
pub fn depth_range_for_half_depth(z_o: f64, focal_length: f64) -> f64 {
    1.0 / (focal_length - 2.0 * z_o) - 1.0 / focal_length
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Resolution {
    CyclesPerDegree(f64),
    /// Full bandwidth (cycles/m).
    Bandwidth(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ViewRequirement {
    /// Whole views needed per axis (at least 1).
    pub views: usize,
    /// `lambda z_o B_x^2` before rounding up.
    pub raw: f64,
    pub bandwidth: f64,
    pub half_depth: f64,
}

/// Views per axis needed to reproduce bandwidth `B_x` over `d_max`
/// diopters. `cutoff_cpd`, when given, rejects resolutions the display
/// cannot show.
pub fn required_views(
    resolution: Resolution,
    d_max: f64,
    focal_length: f64,
    wavelength: f64,
    cutoff_cpd: Option<f64>,
) -> Result<ViewRequirement> {
    if !(d_max >= 0.0 && focal_length > 0.0 && wavelength > 0.0) {
        return Err(Error::InvalidArgument("need D_max >= 0, f > 0 and lambda > 0".into()));
    }
    let bandwidth = match resolution {
        Resolution::CyclesPerDegree(cpd) => {
            if !(cpd > 0.0) {
                return Err(Error::InvalidArgument("resolution must be positive".into()));
            }
            if let Some(cut) = cutoff_cpd {
                if cpd > cut {
                    return Err(Error::AboveCutoff { requested: cpd, cutoff: cut });
                }
            }
            bandwidth_from_cpd(cpd, focal_length)
        }
        Resolution::Bandwidth(b) => {
            if !(b > 0.0) {
                return Err(Error::InvalidArgument("bandwidth must be positive".into()));
            }
            b
        }
    };
    let half_depth = half_depth_for_range(d_max, focal_length);
    let raw = wavelength * half_depth * bandwidth * bandwidth;
    Ok(ViewRequirement { views: (raw.ceil() as usize).max(1), raw, bandwidth, half_depth })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DepthRange {
    Bounded(f64),
    /// The view count covers any depth range at this bandwidth.
    Unbounded,
}

impl DepthRange {
    pub fn diopters(self) -> Option<f64> {
        match self {
            DepthRange::Bounded(d) => Some(d),
            DepthRange::Unbounded => None,
        }
    }
}

/// Largest depth range (diopters) that `n_u` views support at bandwidth
/// `B_x`: `2 N / (f (f lambda B^2 - 2 N))`.
pub fn max_depth_range(n_u: f64, bandwidth: f64, focal_length: f64, wavelength: f64) -> Result<DepthRange> {
    if !(n_u >= 0.0 && bandwidth >= 0.0 && focal_length > 0.0 && wavelength > 0.0) {
        return Err(Error::InvalidArgument("need N_u >= 0, B_x >= 0, f > 0 and lambda > 0".into()));
    }
    let denom = focal_length * (focal_length * wavelength * bandwidth * bandwidth - 2.0 * n_u);
    if denom <= 0.0 {
        return Ok(DepthRange::Unbounded);
    }
    Ok(DepthRange::Bounded(2.0 * n_u / denom))
}

//! Physical configuration of the near-eye display and the closed-form
//! geometry derived from it.
//!
//! Depths are measured along the optical axis. The far clipping plane (FCP)
//! sits at the eyepiece focal length and is imaged to optical infinity; the
//! near clipping plane (NCP) sits `2 z_o` closer to the lens. The wavefront
//! recording plane (WRP) is halfway between the two, `z_WRP` away from the
//! (relayed) SLM.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixel counts of a 2D grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub cols: usize,
    pub rows: usize,
}

impl Resolution {
    pub const fn new(cols: usize, rows: usize) -> Self {
        Self { cols, rows }
    }

    /// `(rows, cols)`, the order ndarray uses.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalConfig {
    /// Vacuum wavelengths, one per color channel (m).
    pub wavelengths: Vec<f64>,
    /// SLM pixel pitch (m).
    pub pixel_pitch: f64,
    pub slm_resolution: Resolution,
    pub active_resolution: Resolution,
    /// Eyepiece focal length `f` (m).
    pub eyepiece_focal_length: f64,
    /// Half of the metric FCP-to-NCP distance, `z_o` (m).
    pub half_depth: f64,
    /// Distance from the SLM relay output to the WRP (m).
    pub wrp_distance: f64,
    /// Number of time-multiplexed binary frames per perceived image.
    pub num_frames: usize,
    /// Keep only the upper spectral half-plane (single sideband encoding).
    pub sideband: bool,
    /// Channel whose diffraction angle sizes the eyebox. Defaults to the
    /// shortest wavelength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eyebox_channel: Option<usize>,
}

impl OpticalConfig {
    /// The prototype hardware: 1920x1200 binary SLM at 8.2 um, 1600x900
    /// active area, 40 mm eyepiece, RGB laser lines, 0 D to 9.57 D volume.
    pub fn prototype() -> Self {
        Self {
            wavelengths: vec![638e-9, 520e-9, 450e-9],
            pixel_pitch: 8.2e-6,
            slm_resolution: Resolution::new(1920, 1200),
            active_resolution: Resolution::new(1600, 900),
            eyepiece_focal_length: 40e-3,
            half_depth: 11.07e-3 / 2.0,
            wrp_distance: 10e-3,
            num_frames: 8,
            sideband: true,
            eyebox_channel: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.wavelengths.is_empty() {
            return bad("at least one wavelength is required".into());
        }
        if let Some(&w) = self.wavelengths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return bad(format!("wavelength {w} must be positive"));
        }
        for (name, v) in [
            ("pixel_pitch", self.pixel_pitch),
            ("eyepiece_focal_length", self.eyepiece_focal_length),
            ("half_depth", self.half_depth),
            ("wrp_distance", self.wrp_distance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let (s, a) = (self.slm_resolution, self.active_resolution);
        if s.cols == 0 || s.rows == 0 || a.cols == 0 || a.rows == 0 {
            return bad("resolutions must be nonzero".into());
        }
        if a.cols > s.cols || a.rows > s.rows {
            return bad(format!(
                "active resolution {}x{} exceeds SLM resolution {}x{}",
                a.cols, a.rows, s.cols, s.rows
            ));
        }
        if self.num_frames == 0 {
            return bad("num_frames must be at least 1".into());
        }
        if 2.0 * self.half_depth >= self.eyepiece_focal_length {
            return bad(format!(
                "near clipping plane must stay inside the focal length: 2 z_o = {} >= f = {}",
                2.0 * self.half_depth,
                self.eyepiece_focal_length
            ));
        }
        if let Some(c) = self.eyebox_channel {
            if c >= self.wavelengths.len() {
                return bad(format!("eyebox_channel {c} out of range"));
            }
        }
        Ok(())
    }

    pub fn num_channels(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn wavelength(&self, channel: usize) -> Result<f64> {
        self.wavelengths.get(channel).copied().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "channel {channel} out of range ({} wavelengths)",
                self.wavelengths.len()
            ))
        })
    }

    /// Channel used to size the eyebox.
    pub fn eyebox_reference_channel(&self) -> usize {
        self.eyebox_channel.unwrap_or_else(|| {
            self.wavelengths
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0)
        })
    }

    /// Dioptric distance of the near clipping plane, `1/(f - 2 z_o) - 1/f`.
    pub fn d_ncp(&self) -> f64 {
        let f = self.eyepiece_focal_length;
        1.0 / (f - 2.0 * self.half_depth) - 1.0 / f
    }

    pub fn z_fcp(&self) -> f64 {
        self.wrp_distance - self.half_depth
    }

    pub fn z_ncp(&self) -> f64 {
        self.wrp_distance + self.half_depth
    }

    /// Diopters of a plane `offset` metres from the WRP (positive toward the
    /// NCP).
    pub fn diopters_at_offset(&self, offset: f64) -> f64 {
        let f = self.eyepiece_focal_length;
        let from_fcp = offset + self.half_depth;
        1.0 / (f - from_fcp) - 1.0 / f
    }

    /// Inverse of [`Self::diopters_at_offset`].
    pub fn offset_at_diopters(&self, diopters: f64) -> f64 {
        let f = self.eyepiece_focal_length;
        let from_fcp = f - 1.0 / (diopters + 1.0 / f);
        from_fcp - self.half_depth
    }

    /// Diopters of the WRP itself.
    pub fn wrp_diopters(&self) -> f64 {
        self.diopters_at_offset(0.0)
    }
}

/// Full diffraction angle `2 asin(lambda / 2p)` for one channel.
pub fn diffraction_angle(cfg: &OpticalConfig, channel: usize) -> Result<f64> {
    let lambda = cfg.wavelength(channel)?;
    diffraction_angle_for(lambda, cfg.pixel_pitch)
}

pub fn diffraction_angle_for(wavelength: f64, pitch: f64) -> Result<f64> {
    let s = wavelength / (2.0 * pitch);
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!(
            "lambda/(2p) = {s} lies outside [0, 1]; no propagating diffraction order"
        )));
    }
    Ok(2.0 * s.asin())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisplayGeometry {
    /// Diffraction angle per channel (rad).
    pub theta_diff: Vec<f64>,
    /// Eyebox `(width, height)` per channel (m); height is halved with the
    /// sideband filter.
    pub eyebox_per_channel: Vec<(f64, f64)>,
    /// Eyebox of the reference channel (m).
    pub eyebox: (f64, f64),
    /// Horizontal and vertical field of view (deg).
    pub fov_deg: (f64, f64),
    /// Finest displayable angular frequency (cycles/deg).
    pub max_cpd: f64,
    /// Dioptric distance of the NCP.
    pub d_ncp: f64,
}

pub fn display_geometry(cfg: &OpticalConfig) -> Result<DisplayGeometry> {
    cfg.validate()?;
    let f = cfg.eyepiece_focal_length;
    let p = cfg.pixel_pitch;
    let theta_diff = (0..cfg.num_channels())
        .map(|c| diffraction_angle(cfg, c))
        .collect::<Result<Vec<_>>>()?;
    let eyebox_per_channel: Vec<(f64, f64)> = theta_diff
        .iter()
        .map(|t| {
            let w = f * t;
            (w, if cfg.sideband { w / 2.0 } else { w })
        })
        .collect();
    let eyebox = eyebox_per_channel[cfg.eyebox_reference_channel()];
    let fov = |n: usize| (2.0 * (n as f64 * p / (2.0 * f)).atan()).to_degrees();
    Ok(DisplayGeometry {
        theta_diff,
        eyebox_per_channel,
        eyebox,
        fov_deg: (fov(cfg.active_resolution.cols), fov(cfg.active_resolution.rows)),
        max_cpd: max_cpd(f, p),
        d_ncp: cfg.d_ncp(),
    })
}

/// Nyquist-limited angular resolution `(f / 2p) (pi / 180)` in cycles/deg.
pub fn max_cpd(focal_length: f64, pitch: f64) -> f64 {
    focal_length / (2.0 * pitch) * std::f64::consts::PI / 180.0
}

/// One sampled depth plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneDepth {
    pub diopters: f64,
    /// Signed metric offset from the WRP, positive toward the NCP (m).
    pub offset_from_wrp: f64,
    /// Propagation distance from the SLM plane (m).
    pub distance_from_slm: f64,
}

impl PlaneDepth {
    pub fn from_diopters(cfg: &OpticalConfig, diopters: f64) -> Self {
        let offset = cfg.offset_at_diopters(diopters);
        Self {
            diopters,
            offset_from_wrp: offset,
            distance_from_slm: cfg.wrp_distance + offset,
        }
    }
}

/// `k` planes uniformly spaced in diopters over `[0, d_ncp]`, endpoints
/// included. A single plane is placed at the WRP.
pub fn plane_depths(cfg: &OpticalConfig, k: usize) -> Result<Vec<PlaneDepth>> {
    cfg.validate()?;
    if k == 0 {
        return Err(Error::InvalidArgument("plane count must be at least 1".into()));
    }
    if k == 1 {
        return Ok(vec![PlaneDepth::from_diopters(cfg, cfg.wrp_diopters())]);
    }
    let d_ncp = cfg.d_ncp();
    Ok((0..k)
        .map(|i| {
            let d = if i == k - 1 { d_ncp } else { d_ncp * i as f64 / (k - 1) as f64 };
            PlaneDepth::from_diopters(cfg, d)
        })
        .collect())
}

//! Light-field directories and RGB-D image pairs on disk.
//!
//! A light-field directory holds one file per view named
//! `view_{row:02}_{col:02}.pfm` or `.png`; `row` indexes the vertical
//! direction and `col` the horizontal one.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::io::pfm::{read_pfm, FloatImage};
use crate::io::png::read_png;
use crate::optics::{diffraction_angle, OpticalConfig};
use crate::targets::lightfield::{display_view_angles, LightField};
use crate::targets::RgbdTarget;

/// Raw light-field views as read from disk, before angles are attached.
#[derive(Clone, Debug)]
pub struct LightFieldImages {
    /// Row-major over `(row, col)`.
    pub views: Vec<FloatImage>,
    pub n_u: usize,
    pub n_v: usize,
}

impl LightFieldImages {
    pub fn channels(&self) -> usize {
        self.views[0].channels.len()
    }

    /// One light field per optical channel. Angles span the display's
    /// diffraction cone for each wavelength. Single-channel views are shared
    /// by every wavelength.
    pub fn into_light_fields(self, cfg: &OpticalConfig) -> Result<Vec<LightField>> {
        let nch = cfg.num_channels();
        let have = self.channels();
        if have != nch && have != 1 {
            return Err(Error::ShapeMismatch(format!(
                "light field has {have} channels, configuration has {nch} wavelengths"
            )));
        }
        (0..nch)
            .map(|c| {
                let src = if have == 1 { 0 } else { c };
                let views = self.views.iter().map(|v| v.channels[src].clone()).collect();
                let theta = diffraction_angle(cfg, c)?;
                let (ax, ay) = display_view_angles(self.n_u, self.n_v, theta, cfg.sideband);
                LightField::new(views, ax, ay)
            })
            .collect()
    }
}

fn parse_view_name(name: &str) -> Option<(usize, usize, &str)> {
    let stem = name.strip_prefix("view_")?;
    let (stem, ext) = stem.rsplit_once('.')?;
    let (row, col) = stem.split_once('_')?;
    if row.len() < 2 || col.len() < 2 || !row.bytes().chain(col.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((row.parse().ok()?, col.parse().ok()?, ext))
}

fn read_image(path: &Path) -> Result<FloatImage> {
    match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref() {
        Some("pfm") => read_pfm(path),
        Some("png") => read_png(path),
        _ => Err(Error::Malformed {
            format: "image",
            reason: format!("{}: unsupported extension", path.display()),
        }),
    }
}

/// Load every `view_RR_CC` file in `dir`. Values are clipped at zero and,
/// if any exceed one, divided by the global maximum.
pub fn load_lightfield(dir: impl AsRef<Path>) -> Result<LightFieldImages> {
    let dir = dir.as_ref();
    let mut found: BTreeMap<(usize, usize), PathBuf> = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let Some((row, col, ext)) = parse_view_name(name) else { continue };
        if !matches!(ext.to_ascii_lowercase().as_str(), "pfm" | "png") {
            continue;
        }
        if found.insert((row, col), path.clone()).is_some() {
            return Err(Error::InvalidArgument(format!("view ({row}, {col}) appears more than once in {}", dir.display())));
        }
    }
    if found.is_empty() {
        return Err(Error::InvalidArgument(format!("no view_RR_CC files in {}", dir.display())));
    }
    let n_v = found.keys().map(|k| k.0).max().unwrap_or(0) + 1;
    let n_u = found.keys().map(|k| k.1).max().unwrap_or(0) + 1;
    let mut views = Vec::with_capacity(n_u * n_v);
    for row in 0..n_v {
        for col in 0..n_u {
            let path = found.get(&(row, col)).ok_or(Error::MissingView { row, col })?;
            views.push(read_image(path)?);
        }
    }
    let (dim, nch) = (views[0].dim(), views[0].channels.len());
    for (k, v) in views.iter().enumerate() {
        if v.dim() != dim || v.channels.len() != nch {
            return Err(Error::ShapeMismatch(format!(
                "view ({}, {}) is {:?} with {} channels, view (0, 0) is {dim:?} with {nch}",
                k / n_u,
                k % n_u,
                v.dim(),
                v.channels.len()
            )));
        }
    }
    let max = views.iter().flat_map(|v| v.channels.iter().flatten()).fold(0.0f64, |m, &x| m.max(x));
    let scale = if max > 1.0 { 1.0 / max } else { 1.0 };
    for v in &mut views {
        for ch in &mut v.channels {
            ch.mapv_inplace(|x| x.max(0.0) * scale);
        }
    }
    Ok(LightFieldImages { views, n_u, n_v })
}

/// Load an image plus a depth map. Image values are linear intensities in
/// [0, 1]; the target stores their square root. Depth codes in [0, 1] map
/// linearly onto `depth_range` diopters.
pub fn load_rgbd(
    image: impl AsRef<Path>,
    depth: impl AsRef<Path>,
    depth_range: (f64, f64),
    cfg: &OpticalConfig,
) -> Result<RgbdTarget> {
    let img = read_image(image.as_ref())?;
    let dimg = read_image(depth.as_ref())?;
    if dimg.channels.len() != 1 {
        return Err(Error::Malformed {
            format: "depth map",
            reason: format!("{}: expected one channel, found {}", depth.as_ref().display(), dimg.channels.len()),
        });
    }
    let (lo, hi) = depth_range;
    let d = dimg.channels[0].mapv(|v| lo + v.clamp(0.0, 1.0) * (hi - lo));
    let nch = cfg.num_channels();
    let have = img.channels.len();
    let amplitude: Vec<Array2<f64>> = match (have, nch) {
        (a, b) if a == b => img.channels.iter().map(|c| c.mapv(|v| v.clamp(0.0, 1.0).sqrt())).collect(),
        (1, _) => vec![img.channels[0].mapv(|v| v.clamp(0.0, 1.0).sqrt()); nch],
        (3, 1) => {
            // Luma of the linear RGB values.
            let y = &img.channels[0] * 0.2126 + &img.channels[1] * 0.7152 + &img.channels[2] * 0.0722;
            vec![y.mapv(|v| v.clamp(0.0, 1.0).sqrt())]
        }
        _ => {
            return Err(Error::ShapeMismatch(format!("image has {have} channels, configuration has {nch} wavelengths")));
        }
    };
    RgbdTarget::new(amplitude, d, cfg.d_ncp())
}

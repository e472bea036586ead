//! Minimum angle of resolution, ocular-parallax thresholds and the
//! parallax detection rate between two sets of retinal images.
//!
//! Feature correspondences come from deterministic block matching: Harris
//! corners in the first image are matched by normalized cross-correlation
//! over an integer search window in the second.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParallaxModel {
    /// MAR slope (deg/deg of eccentricity).
    pub mar_slope: f64,
    /// Foveal MAR (deg).
    pub mar_foveal: f64,
    /// Dioptric detection threshold at 15 degrees eccentricity.
    pub threshold_at_15: f64,
    /// Dioptric threshold slope (D/deg).
    pub threshold_slope: f64,
    /// Visual angle of one image pixel (deg).
    pub degrees_per_pixel: f64,
    /// Matching patch is `2 h + 1` pixels square.
    pub patch_half: usize,
    pub search_radius: usize,
    pub min_correlation: f64,
    pub max_features: usize,
    pub harris_k: f64,
    pub nms_radius: usize,
    /// Corners below this fraction of the strongest response are dropped.
    pub relative_threshold: f64,
}

impl Default for ParallaxModel {
    fn default() -> Self {
        Self {
            mar_slope: 0.022,
            mar_foveal: 1.0 / 60.0,
            threshold_at_15: 0.36,
            threshold_slope: 0.0016,
            degrees_per_pixel: (8.2e-6f64 / 0.04).atan().to_degrees(),
            patch_half: 4,
            search_radius: 16,
            min_correlation: 0.8,
            max_features: 400,
            harris_k: 0.04,
            nms_radius: 3,
            relative_threshold: 0.01,
        }
    }
}

impl ParallaxModel {
    /// Display with pitch `p` behind an eyepiece of focal length `f`.
    pub fn for_display(pixel_pitch: f64, focal_length: f64) -> Self {
        Self { degrees_per_pixel: (pixel_pitch / focal_length).atan().to_degrees(), ..Self::default() }
    }

    /// `omega(e) = slope e + omega_0` (deg).
    pub fn mar(&self, eccentricity_deg: f64) -> f64 {
        self.mar_slope * eccentricity_deg + self.mar_foveal
    }

    /// Dioptric detection threshold, linear in eccentricity through the
    /// 15 degree anchor.
    pub fn parallax_threshold(&self, eccentricity_deg: f64) -> f64 {
        self.threshold_at_15 + self.threshold_slope * (eccentricity_deg - 15.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mar_slope < 0.0 || self.threshold_slope < 0.0 {
            return Err(Error::InvalidArgument("threshold slopes must be >= 0".into()));
        }
        if !(self.degrees_per_pixel > 0.0) || self.patch_half == 0 || self.max_features == 0 {
            return Err(Error::InvalidArgument("degrees_per_pixel, patch_half and max_features must be positive".into()));
        }
        if !(-1.0..=1.0).contains(&self.min_correlation) {
            return Err(Error::InvalidArgument("min_correlation must lie in [-1, 1]".into()));
        }
        Ok(())
    }
}

pub fn mar(eccentricity_deg: f64) -> f64 {
    ParallaxModel::default().mar(eccentricity_deg)
}

pub fn parallax_threshold(eccentricity_deg: f64) -> f64 {
    ParallaxModel::default().parallax_threshold(eccentricity_deg)
}

/// One accepted correspondence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Match {
    /// Anchor `(row, col)` in the first image.
    pub anchor: (usize, usize),
    /// Integer displacement `(d_row, d_col)` into the second image.
    pub displacement: (isize, isize),
    pub correlation: f64,
}

fn smooth(img: &Array2<f64>, sigma: f64) -> Array2<f64> {
    let r = (3.0 * sigma).ceil() as isize;
    let taps: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = taps.iter().sum();
    let (rows, cols) = img.dim();
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = Array2::zeros((rows, cols));
    for y in 0..rows {
        for x in 0..cols {
            tmp[[y, x]] =
                taps.iter().enumerate().map(|(k, w)| w * img[[y, clamp(x as isize + k as isize - r, cols)]]).sum::<f64>() / s;
        }
    }
    let mut out = Array2::zeros((rows, cols));
    for y in 0..rows {
        for x in 0..cols {
            out[[y, x]] =
                taps.iter().enumerate().map(|(k, w)| w * tmp[[clamp(y as isize + k as isize - r, rows), x]]).sum::<f64>() / s;
        }
    }
    out
}

/// Harris corner response with Sobel gradients and a Gaussian
/// (sigma 1.5) structure tensor.
pub fn harris_response(img: &Array2<f64>, k: f64) -> Array2<f64> {
    let (rows, cols) = img.dim();
    let at = |y: isize, x: isize| img[[y.clamp(0, rows as isize - 1) as usize, x.clamp(0, cols as isize - 1) as usize]];
    let mut ixx = Array2::zeros((rows, cols));
    let mut iyy = Array2::zeros((rows, cols));
    let mut ixy = Array2::zeros((rows, cols));
    for y in 0..rows as isize {
        for x in 0..cols as isize {
            let gx = (at(y - 1, x + 1) + 2.0 * at(y, x + 1) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + 2.0 * at(y, x - 1) + at(y + 1, x - 1));
            let gy = (at(y + 1, x - 1) + 2.0 * at(y + 1, x) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + 2.0 * at(y - 1, x) + at(y - 1, x + 1));
            let i = (y as usize, x as usize);
            ixx[i] = gx * gx;
            iyy[i] = gy * gy;
            ixy[i] = gx * gy;
        }
    }
    let (sxx, syy, sxy) = (smooth(&ixx, 1.5), smooth(&iyy, 1.5), smooth(&ixy, 1.5));
    Array2::from_shape_fn((rows, cols), |i| {
        let det = sxx[i] * syy[i] - sxy[i] * sxy[i];
        let tr = sxx[i] + syy[i];
        det - k * tr * tr
    })
}

/// Strongest local maxima of the Harris response, at least `patch_half`
/// pixels from the border, ordered by decreasing response (ties by
/// position).
pub fn harris_corners(img: &Array2<f64>, model: &ParallaxModel) -> Vec<(usize, usize)> {
    let resp = harris_response(img, model.harris_k);
    let (rows, cols) = img.dim();
    let h = model.patch_half;
    let max = resp.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) || rows <= 2 * h || cols <= 2 * h {
        return Vec::new();
    }
    let floor = model.relative_threshold * max;
    let nr = model.nms_radius as isize;
    let mut found = Vec::new();
    for y in h..rows - h {
        for x in h..cols - h {
            let v = resp[[y, x]];
            if v <= floor {
                continue;
            }
            let mut is_max = true;
            'nb: for dy in -nr..=nr {
                for dx in -nr..=nr {
                    let (yy, xx) = (y as isize + dy, x as isize + dx);
                    if (dy, dx) == (0, 0) || yy < 0 || xx < 0 || yy >= rows as isize || xx >= cols as isize {
                        continue;
                    }
                    let w = resp[[yy as usize, xx as usize]];
                    // Plateaus keep only their first pixel in raster order.
                    if w > v || (w == v && (dy, dx) < (0, 0)) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                found.push((v, y, x));
            }
        }
    }
    found.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    found.truncate(model.max_features);
    found.into_iter().map(|(_, y, x)| (y, x)).collect()
}

fn ncc(a: &Array2<f64>, (ay, ax): (usize, usize), b: &Array2<f64>, (by, bx): (usize, usize), h: usize) -> Option<f64> {
    let n = ((2 * h + 1) * (2 * h + 1)) as f64;
    let (mut sa, mut sb) = (0.0, 0.0);
    for i in 0..=2 * h {
        for j in 0..=2 * h {
            sa += a[[ay + i - h, ax + j - h]];
            sb += b[[by + i - h, bx + j - h]];
        }
    }
    let (ma, mb) = (sa / n, sb / n);
    let (mut caa, mut cbb, mut cab) = (0.0, 0.0, 0.0);
    for i in 0..=2 * h {
        for j in 0..=2 * h {
            let da = a[[ay + i - h, ax + j - h]] - ma;
            let db = b[[by + i - h, bx + j - h]] - mb;
            caa += da * da;
            cbb += db * db;
            cab += da * db;
        }
    }
    // Flat patches (relative to their mean level) have no defined correlation.
    let floor_a = 1e-12 * n * ma * ma;
    let floor_b = 1e-12 * n * mb * mb;
    if caa <= floor_a || cbb <= floor_b || caa == 0.0 || cbb == 0.0 {
        return None;
    }
    Some(cab / (caa * cbb).sqrt())
}

/// Match Harris anchors of `a` into `b`. Displacements are tried in order
/// of increasing length, so ties resolve toward no motion.
pub fn match_features(a: &Array2<f64>, b: &Array2<f64>, model: &ParallaxModel) -> Result<Vec<Match>> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.dim(), b.dim())));
    }
    let (rows, cols) = a.dim();
    let h = model.patch_half;
    let r = model.search_radius as isize;
    let mut offsets: Vec<(isize, isize)> = (-r..=r).flat_map(|dy| (-r..=r).map(move |dx| (dy, dx))).collect();
    offsets.sort_by_key(|&(dy, dx)| (dy * dy + dx * dx, dy, dx));
    let mut out = Vec::new();
    for anchor in harris_corners(a, model) {
        let mut best: Option<((isize, isize), f64)> = None;
        for &(dy, dx) in &offsets {
            let (y, x) = (anchor.0 as isize + dy, anchor.1 as isize + dx);
            if y < h as isize || x < h as isize || y + h as isize >= rows as isize || x + h as isize >= cols as isize {
                continue;
            }
            if let Some(c) = ncc(a, anchor, b, (y as usize, x as usize), h) {
                if best.map_or(true, |(_, bc)| c > bc) {
                    best = Some(((dy, dx), c));
                }
            }
        }
        if let Some((d, c)) = best {
            if c >= model.min_correlation {
                out.push(Match { anchor, displacement: d, correlation: c });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionRate {
    pub rate: f64,
    pub matched: usize,
    pub detected: usize,
    /// `(matched, detected)` per focal state.
    pub per_state: Vec<(usize, usize)>,
}

/// Whether a match moves by more than the MAR at its eccentricity. The
/// eccentricity is measured from the image center.
pub fn exceeds_threshold(m: &Match, dim: (usize, usize), model: &ParallaxModel) -> bool {
    let cy = (dim.0 as f64 - 1.0) / 2.0;
    let cx = (dim.1 as f64 - 1.0) / 2.0;
    let ecc = ((m.anchor.0 as f64 - cy).hypot(m.anchor.1 as f64 - cx)) * model.degrees_per_pixel;
    let disp = (m.displacement.0 as f64).hypot(m.displacement.1 as f64) * model.degrees_per_pixel;
    disp > model.mar(ecc)
}

/// Fraction of matched features, pooled over all focal states, whose
/// displacement exceeds the eccentricity-dependent MAR.
pub fn parallax_detection_rate(
    frames1: &[Array2<f64>],
    frames2: &[Array2<f64>],
    model: &ParallaxModel,
) -> Result<DetectionRate> {
    model.validate()?;
    if frames1.is_empty() || frames1.len() != frames2.len() {
        return Err(Error::InvalidArgument(format!(
            "need equal, nonzero focal-state counts, got {} and {}",
            frames1.len(),
            frames2.len()
        )));
    }
    let per_state = frames1
        .par_iter()
        .zip(frames2.par_iter())
        .map(|(a, b)| {
            let m = match_features(a, b, model)?;
            let det = m.iter().filter(|m| exceeds_threshold(m, a.dim(), model)).count();
            Ok((m.len(), det))
        })
        .collect::<Result<Vec<_>>>()?;
    let matched: usize = per_state.iter().map(|s| s.0).sum();
    let detected: usize = per_state.iter().map(|s| s.1).sum();
    if matched == 0 {
        return Err(Error::NoMatches);
    }
    Ok(DetectionRate { rate: detected as f64 / matched as f64, matched, detected, per_state })
}

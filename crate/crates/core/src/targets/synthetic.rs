//! Procedural desk scene and an orthographic layered light-field renderer.

use ndarray::Array2;

use crate::error::Result;
use crate::optics::{OpticalConfig, PlaneDepth};
use crate::targets::lightfield::LightField;
use crate::targets::masks::closest_distance_masks;
use crate::targets::RgbdTarget;
use crate::wave::fourier_shift;

/// Three-depth desk scene at `(rows, cols)`: a textured far wall at 0 D, a
/// checkered box at the WRP and a ringed disk near the near clipping plane.
pub fn desk_scene(cfg: &OpticalConfig, rows: usize, cols: usize) -> Result<RgbdTarget> {
    let d_ncp = cfg.d_ncp();
    let d_mid = cfg.wrp_diopters();
    let d_near = 0.85 * d_ncp;
    let (h, w) = (rows as f64, cols as f64);
    let tint = [[0.9, 0.6, 0.5], [0.5, 0.9, 0.6], [0.6, 0.5, 0.9]];
    let mut depth = Array2::zeros((rows, cols));
    let mut label = Array2::<u8>::zeros((rows, cols));
    for ((r, c), d) in depth.indexed_iter_mut() {
        let (y, x) = (r as f64, c as f64);
        let in_box = (0.15 * w..0.5 * w).contains(&x) && (0.3 * h..0.85 * h).contains(&y);
        let (dx, dy) = (x - 0.7 * w, y - 0.4 * h);
        let in_disk = dx * dx + dy * dy <= (0.22 * h).powi(2);
        *d = 0.0;
        if in_box {
            *d = d_mid;
            label[[r, c]] = 1;
        }
        if in_disk {
            *d = d_near;
            label[[r, c]] = 2;
        }
    }
    let amplitude = (0..cfg.num_channels())
        .map(|ch| {
            let t = tint[ch % 3];
            Array2::from_shape_fn((rows, cols), |(r, c)| {
                let (y, x) = (r as f64, c as f64);
                let v = match label[[r, c]] {
                    0 => 0.35 + 0.15 * (x / 6.0).sin() * (y / 9.0).cos() + 0.1 * y / h,
                    1 => {
                        if ((r / 6) + (c / 6)) % 2 == 0 {
                            0.95
                        } else {
                            0.25
                        }
                    }
                    _ => {
                        let rr = ((x - 0.7 * w).powi(2) + (y - 0.4 * h).powi(2)).sqrt();
                        0.55 + 0.4 * (rr / 2.5).cos()
                    }
                };
                (v * t[label[[r, c]] as usize]).clamp(0.0, 1.0)
            })
        })
        .collect();
    RgbdTarget::new(amplitude, depth, d_ncp)
}

/// Render orthographic views of one channel of an RGB-D target. The scene
/// is cut into nearest-plane layers; in the view with direction `(u, v)` a
/// layer at offset `dz` from the WRP is displaced by `-tan(u) dz / pitch`
/// pixels, and layers are composited far to near. Mattes are clipped to
/// [0, 1] and intensities at 0 after the sub-pixel shifts.
pub fn render_light_field(
    target: &RgbdTarget,
    channel: usize,
    planes: &[PlaneDepth],
    angles_x: Vec<f64>,
    angles_y: Vec<f64>,
    pitch: f64,
) -> Result<LightField> {
    let diopters: Vec<f64> = planes.iter().map(|p| p.diopters).collect();
    let masks = closest_distance_masks(&target.depth, &diopters)?;
    let intensity = target.intensity(channel);
    let occupied: Vec<usize> =
        (0..planes.len()).filter(|&k| masks.masks[k].iter().any(|&v| v > 0.0)).collect();
    let mut views = Vec::with_capacity(angles_x.len() * angles_y.len());
    for &v in &angles_y {
        for &u in &angles_x {
            let mut acc = Array2::<f64>::zeros(target.dim());
            for &k in &occupied {
                let dz = planes[k].offset_from_wrp;
                let (dx, dy) = (-u.tan() * dz / pitch, -v.tan() * dz / pitch);
                let matte = fourier_shift(&masks.masks[k], dx, dy).mapv(|m| m.clamp(0.0, 1.0));
                let layer = fourier_shift(&(&intensity * &masks.masks[k]), dx, dy).mapv(|i| i.max(0.0));
                acc.zip_mut_with(&matte, |a, &m| *a *= 1.0 - m);
                acc += &layer;
            }
            views.push(acc);
        }
    }
    LightField::new(views, angles_x, angles_y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::lightfield::uniform_angles;

    #[test]
    fn desk_scene_is_valid_and_has_three_depths() {
        let cfg = OpticalConfig::prototype();
        let t = desk_scene(&cfg, 120, 192).unwrap();
        assert_eq!(t.channels(), 3);
        let mut ds: Vec<f64> = t.depth.iter().cloned().collect();
        ds.sort_by(f64::total_cmp);
        ds.dedup();
        assert_eq!(ds.len(), 3);
    }

    #[test]
    fn central_view_of_wrp_scene_is_the_image() {
        let cfg = OpticalConfig::prototype();
        let t = desk_scene(&cfg, 40, 48).unwrap();
        let wrp = PlaneDepth::from_diopters(&cfg, cfg.wrp_diopters());
        let flat = RgbdTarget::new(t.amplitude.clone(), Array2::from_elem((40, 48), wrp.diopters), cfg.d_ncp()).unwrap();
        let lf = render_light_field(&flat, 0, &[wrp], uniform_angles(3, -0.02, 0.02), vec![0.0], cfg.pixel_pitch).unwrap();
        let want = flat.intensity(0);
        for v in &lf.views {
            assert!(v.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }
}

//! Light fields and the short-time Fourier transform that extracts an
//! observable light field from a wavefront.
//!
//! The STFT cuts the field into `window x window` patches (step `hop`) and
//! takes a unitary DFT of each patch. The local spectrum of a patch is split
//! into a `U x V` grid of rectangular cells covering the usable band (the
//! upper half-plane when the sideband filter is on). A view is one cell: its
//! pixel value at a patch is the spectral energy inside the cell, i.e. the
//! light leaving that patch in the cell's range of directions.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{bin_index, Fft2};
use crate::wave::ComplexField;

/// Single-channel light field stored as intensities.
#[derive(Clone, Debug, PartialEq)]
pub struct LightField {
    /// Views in row-major view order: `views[j * n_u + i]` has horizontal
    /// angle `angles_x[i]` and vertical angle `angles_y[j]`.
    pub views: Vec<Array2<f64>>,
    pub n_u: usize,
    pub n_v: usize,
    /// Horizontal view directions (rad), strictly increasing.
    pub angles_x: Vec<f64>,
    /// Vertical view directions (rad), strictly increasing.
    pub angles_y: Vec<f64>,
    pub orthographic: bool,
}

impl LightField {
    pub fn new(views: Vec<Array2<f64>>, angles_x: Vec<f64>, angles_y: Vec<f64>) -> Result<Self> {
        let (n_u, n_v) = (angles_x.len(), angles_y.len());
        if n_u == 0 || n_v == 0 {
            return Err(Error::InvalidArgument("light field needs at least one view".into()));
        }
        if views.len() != n_u * n_v {
            return Err(Error::ShapeMismatch(format!(
                "{} views for a {n_u}x{n_v} angular grid",
                views.len()
            )));
        }
        let dim = views[0].dim();
        if views.iter().any(|v| v.dim() != dim) {
            return Err(Error::ShapeMismatch("light-field views differ in shape".into()));
        }
        for a in [&angles_x, &angles_y] {
            if a.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidArgument("view angles must be strictly increasing".into()));
            }
        }
        Ok(Self { views, n_u, n_v, angles_x, angles_y, orthographic: true })
    }

    pub fn view(&self, i: usize, j: usize) -> &Array2<f64> {
        &self.views[j * self.n_u + i]
    }

    pub fn dim(&self) -> (usize, usize) {
        self.views[0].dim()
    }

    pub fn num_views(&self) -> usize {
        self.views.len()
    }

    /// Check every angle lies within `+-theta_diff / 2`.
    pub fn check_angular_extent(&self, theta_diff: f64) -> Result<()> {
        let lim = theta_diff / 2.0 + 1e-12;
        if self.angles_x.iter().chain(&self.angles_y).any(|a| a.abs() > lim) {
            return Err(Error::InvalidArgument(format!(
                "view angles exceed the diffraction half-angle {}",
                theta_diff / 2.0
            )));
        }
        Ok(())
    }

    pub fn grand_mean(&self) -> f64 {
        let n: usize = self.views.iter().map(|v| v.len()).sum();
        self.views.iter().map(|v| v.sum()).sum::<f64>() / n as f64
    }
}

/// Uniform view directions over `[lo, hi]` (rad), each at the center of
/// its cell.
pub fn uniform_angles(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

/// View directions for a light field spanning the display's angular
/// bandwidth. With the sideband filter only non-negative vertical angles are
/// reachable.
pub fn display_view_angles(n_u: usize, n_v: usize, theta_diff: f64, sideband: bool) -> (Vec<f64>, Vec<f64>) {
    let h = theta_diff / 2.0;
    let ax = uniform_angles(n_u, -h, h);
    let ay = if sideband { uniform_angles(n_v, 0.0, h) } else { uniform_angles(n_v, -h, h) };
    (ax, ay)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StftParams {
    pub window: usize,
    pub hop: usize,
    /// Views along x (`U`) and y (`V`).
    pub n_views: (usize, usize),
    /// Restrict carriers to the upper (`fy >= 0`) half-plane.
    pub sideband: bool,
}

impl Default for StftParams {
    fn default() -> Self {
        Self { window: 16, hop: 16, n_views: (3, 3), sideband: true }
    }
}

/// Precomputed STFT geometry for one field shape.
#[derive(Clone, Debug)]
pub struct StftPlan {
    params: StftParams,
    field_dim: (usize, usize),
    patch_grid: (usize, usize),
    /// Per view, the FFT-ordered flat bin indices belonging to its cell.
    cells: Vec<Vec<usize>>,
    /// Signed bin-index center of each horizontal / vertical cell.
    carrier_x: Vec<f64>,
    carrier_y: Vec<f64>,
    fft: Fft2,
}

/// Split the sorted signed bins into `n` contiguous cells.
fn split_bins(bins: &[isize], n: usize) -> Vec<Vec<isize>> {
    (0..n)
        .map(|i| {
            let lo = i * bins.len() / n;
            let hi = (i + 1) * bins.len() / n;
            bins[lo..hi].to_vec()
        })
        .collect()
}

impl StftPlan {
    pub fn new(field_dim: (usize, usize), params: StftParams) -> Result<Self> {
        let StftParams { window, hop, n_views: (nu, nv), sideband } = params;
        if window == 0 || hop == 0 || hop > window {
            return Err(Error::InvalidArgument(format!(
                "STFT needs 0 < hop <= window, got hop {hop}, window {window}"
            )));
        }
        if nu == 0 || nv == 0 {
            return Err(Error::InvalidArgument("STFT needs at least one view per axis".into()));
        }
        let (rows, cols) = field_dim;
        if rows < window || cols < window {
            return Err(Error::InvalidArgument(format!(
                "field {rows}x{cols} is smaller than the STFT window {window}"
            )));
        }
        let mut bins: Vec<isize> = (0..window).map(|k| bin_index(k, window)).collect();
        bins.sort_unstable();
        let ybins: Vec<isize> = if sideband { bins.iter().copied().filter(|&b| b >= 0).collect() } else { bins.clone() };
        if nu > bins.len() || nv > ybins.len() {
            return Err(Error::InvalidArgument(format!(
                "{nu}x{nv} views exceed the {}x{} available spectral bins of a {window}-sample window",
                bins.len(),
                ybins.len()
            )));
        }
        let xcells = split_bins(&bins, nu);
        let ycells = split_bins(&ybins, nv);
        let to_pos = |b: isize| b.rem_euclid(window as isize) as usize;
        let mut cells = Vec::with_capacity(nu * nv);
        for yc in &ycells {
            for xc in &xcells {
                let mut idx = Vec::with_capacity(yc.len() * xc.len());
                for &by in yc {
                    for &bx in xc {
                        idx.push(to_pos(by) * window + to_pos(bx));
                    }
                }
                cells.push(idx);
            }
        }
        let center = |c: &Vec<isize>| (c[0] + c[c.len() - 1]) as f64 / 2.0;
        Ok(Self {
            params,
            field_dim,
            patch_grid: ((rows - window) / hop + 1, (cols - window) / hop + 1),
            cells,
            carrier_x: xcells.iter().map(center).collect(),
            carrier_y: ycells.iter().map(center).collect(),
            fft: Fft2::new(window, window),
        })
    }

    pub fn params(&self) -> StftParams {
        self.params
    }

    /// `(rows, cols)` of every view image.
    pub fn patch_grid(&self) -> (usize, usize) {
        self.patch_grid
    }

    pub fn num_views(&self) -> usize {
        self.cells.len()
    }

    /// Carrier spatial frequencies (cycles/m) along x and y for a given
    /// pixel pitch.
    pub fn carrier_frequencies(&self, pitch_x: f64, pitch_y: f64) -> (Vec<f64>, Vec<f64>) {
        let w = self.params.window as f64;
        (
            self.carrier_x.iter().map(|k| k / (w * pitch_x)).collect(),
            self.carrier_y.iter().map(|k| k / (w * pitch_y)).collect(),
        )
    }

    /// View directions `asin(lambda f)` of the carriers (rad).
    pub fn carrier_angles(&self, pitch_x: f64, pitch_y: f64, wavelength: f64) -> (Vec<f64>, Vec<f64>) {
        let (fx, fy) = self.carrier_frequencies(pitch_x, pitch_y);
        let ang = |f: f64| (wavelength * f).clamp(-1.0, 1.0).asin();
        (fx.into_iter().map(ang).collect(), fy.into_iter().map(ang).collect())
    }

    /// Signed integer bin closest to each cell's center, per axis.
    pub fn carrier_bins(&self) -> (Vec<isize>, Vec<isize>) {
        let r = |v: &f64| v.floor() as isize;
        (self.carrier_x.iter().map(r).collect(), self.carrier_y.iter().map(r).collect())
    }

    fn check_dim(&self, dim: (usize, usize)) -> Result<()> {
        if dim != self.field_dim {
            return Err(Error::ShapeMismatch(format!(
                "STFT planned for {:?}, got field {:?}",
                self.field_dim, dim
            )));
        }
        Ok(())
    }

    /// Unitary DFT of every patch: `coeffs[(pr * pcols + pc)]` is a
    /// `window x window` FFT-ordered spectrum.
    pub fn analyze(&self, grid: &Array2<Complex64>) -> Result<Vec<Array2<Complex64>>> {
        self.check_dim(grid.dim())?;
        let (w, hop) = (self.params.window, self.params.hop);
        let (pr, pc) = self.patch_grid;
        let mut out = Vec::with_capacity(pr * pc);
        for i in 0..pr {
            for j in 0..pc {
                let (r0, c0) = (i * hop, j * hop);
                let mut patch = grid.slice(ndarray::s![r0..r0 + w, c0..c0 + w]).to_owned();
                self.fft.forward_ortho(&mut patch);
                out.push(patch);
            }
        }
        Ok(out)
    }

    /// Per-view intensity images from patch spectra.
    pub fn view_intensities(&self, coeffs: &[Array2<Complex64>]) -> Vec<Array2<f64>> {
        let (pr, pc) = self.patch_grid;
        self.cells
            .iter()
            .map(|cell| {
                Array2::from_shape_fn((pr, pc), |(i, j)| {
                    let spec = coeffs[i * pc + j].as_slice().expect("standard layout");
                    cell.iter().map(|&k| spec[k].norm_sqr()).sum()
                })
            })
            .collect()
    }

    /// Adjoint of the per-view intensity map linearized at `coeffs`:
    /// given `dL/dI_v` per view, returns `dL/du*`-style gradient
    /// `sum 2 dL/dI S^H (mask . S u)` on the field grid.
    pub fn backproject(&self, coeffs: &[Array2<Complex64>], grad_views: &[Array2<f64>]) -> Array2<Complex64> {
        let (w, hop) = (self.params.window, self.params.hop);
        let (pr, pc) = self.patch_grid;
        let mut out = Array2::<Complex64>::zeros(self.field_dim);
        for i in 0..pr {
            for j in 0..pc {
                let spec = &coeffs[i * pc + j];
                let src = spec.as_slice().expect("standard layout");
                let mut g = Array2::<Complex64>::zeros((w, w));
                {
                    let dst = g.as_slice_mut().expect("standard layout");
                    for (cell, gv) in self.cells.iter().zip(grad_views) {
                        let d = 2.0 * gv[[i, j]];
                        if d == 0.0 {
                            continue;
                        }
                        for &k in cell {
                            dst[k] += src[k] * d;
                        }
                    }
                }
                self.fft.inverse_ortho(&mut g);
                let (r0, c0) = (i * hop, j * hop);
                let mut dst = out.slice_mut(ndarray::s![r0..r0 + w, c0..c0 + w]);
                dst += &g;
            }
        }
        out
    }
}

/// Observable light field of a field together with the total energy of
/// every view.
#[derive(Clone, Debug)]
pub struct StftLightField {
    pub light_field: LightField,
    pub view_energy: Vec<f64>,
}

/// Extract a `U x V` light field of intensities from a complex field.
pub fn stft_light_field(field: &ComplexField, params: StftParams) -> Result<StftLightField> {
    let plan = StftPlan::new(field.dim(), params)?;
    let coeffs = plan.analyze(&field.grid)?;
    let views = plan.view_intensities(&coeffs);
    let view_energy = views.iter().map(|v| v.sum()).collect();
    let (ax, ay) = plan.carrier_angles(field.pitch.x, field.pitch.y, field.wavelength);
    Ok(StftLightField { light_field: LightField::new(views, ax, ay)?, view_energy })
}

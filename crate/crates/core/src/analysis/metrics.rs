//! PSNR and SSIM.

use ndarray::{s, Array2};

use crate::error::{Error, Result};

/// Side of the SSIM Gaussian window.
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

fn same_shape(a: &Array2<f64>, b: &Array2<f64>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.dim(), b.dim())));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("empty image".into()));
    }
    Ok(())
}

pub fn mse(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64> {
    same_shape(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

/// `10 log10(peak^2 / MSE)` in dB; identical images give `f64::INFINITY`.
pub fn psnr(a: &Array2<f64>, b: &Array2<f64>, peak: f64) -> Result<f64> {
    if !(peak > 0.0) {
        return Err(Error::InvalidArgument(format!("peak must be positive, got {peak}")));
    }
    let m = mse(a, b)?;
    Ok(if m == 0.0 { f64::INFINITY } else { 10.0 * (peak * peak / m).log10() })
}

/// Normalized 1D Gaussian taps.
pub fn gaussian_taps(n: usize, sigma: f64) -> Vec<f64> {
    let c = (n as f64 - 1.0) / 2.0;
    let w: Vec<f64> = (0..n).map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = w.iter().sum();
    w.into_iter().map(|v| v / sum).collect()
}

/// Separable "valid" filtering: output has shape `(rows - n + 1, cols - n + 1)`.
fn filter_valid(img: &Array2<f64>, taps: &[f64]) -> Array2<f64> {
    let n = taps.len();
    let (rows, cols) = img.dim();
    let (orows, ocols) = (rows - n + 1, cols - n + 1);
    let mut tmp = Array2::<f64>::zeros((rows, ocols));
    for r in 0..rows {
        for c in 0..ocols {
            tmp[[r, c]] = taps.iter().enumerate().map(|(k, w)| w * img[[r, c + k]]).sum();
        }
    }
    let mut out = Array2::<f64>::zeros((orows, ocols));
    for r in 0..orows {
        for c in 0..ocols {
            out[[r, c]] = taps.iter().enumerate().map(|(k, w)| w * tmp[[r + k, c]]).sum();
        }
    }
    out
}

/// Mean SSIM over every position where the 11x11 Gaussian window
/// (sigma 1.5) fits, with stabilizers `(0.01 L)^2` and `(0.03 L)^2` for
/// data range `L`.
pub fn ssim_with_range(a: &Array2<f64>, b: &Array2<f64>, data_range: f64) -> Result<f64> {
    same_shape(a, b)?;
    let (rows, cols) = a.dim();
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {rows}x{cols}"
        )));
    }
    if !(data_range > 0.0) {
        return Err(Error::InvalidArgument("data range must be positive".into()));
    }
    let taps = gaussian_taps(SSIM_WINDOW, SSIM_SIGMA);
    let c1 = (K1 * data_range).powi(2);
    let c2 = (K2 * data_range).powi(2);
    let mu_a = filter_valid(a, &taps);
    let mu_b = filter_valid(b, &taps);
    let aa = filter_valid(&(a * a), &taps);
    let bb = filter_valid(&(b * b), &taps);
    let ab = filter_valid(&(a * b), &taps);
    let mut total = 0.0;
    for (((&ma, &mb), (&xx, &yy)), &xy) in mu_a.iter().zip(&mu_b).zip(aa.iter().zip(&bb)).zip(&ab) {
        let va = xx - ma * ma;
        let vb = yy - mb * mb;
        let cov = xy - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    Ok(total / mu_a.len() as f64)
}

/// SSIM for images on `[0, 1]`.
pub fn ssim(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64> {
    ssim_with_range(a, b, 1.0)
}

/// Central crop helper for comparing reconstructions with a border margin.
pub fn crop_border(img: &Array2<f64>, margin: usize) -> Array2<f64> {
    let (r, c) = img.dim();
    if 2 * margin >= r || 2 * margin >= c {
        return img.clone();
    }
    img.slice(s![margin..r - margin, margin..c - margin]).to_owned()
}

//! 2D FFT plumbing over row-major `ndarray` grids.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward/inverse 2D transforms for one grid shape.
///
/// The forward transform is unnormalized; the inverse carries the `1/N`
/// factor, so `inverse(forward(x)) == x`.
#[derive(Clone)]
pub struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn forward(&self, a: &mut Array2<Complex64>) {
        self.run(a, &self.row_fwd, &self.col_fwd);
    }

    pub fn inverse(&self, a: &mut Array2<Complex64>) {
        self.run(a, &self.row_inv, &self.col_inv);
        let scale = 1.0 / (self.rows * self.cols) as f64;
        a.mapv_inplace(|v| v * scale);
    }

    /// Forward transform scaled by `1/sqrt(N)` (unitary).
    pub fn forward_ortho(&self, a: &mut Array2<Complex64>) {
        self.forward(a);
        let scale = 1.0 / ((self.rows * self.cols) as f64).sqrt();
        a.mapv_inplace(|v| v * scale);
    }

    /// Inverse of [`Self::forward_ortho`].
    pub fn inverse_ortho(&self, a: &mut Array2<Complex64>) {
        self.inverse(a);
        let scale = ((self.rows * self.cols) as f64).sqrt();
        a.mapv_inplace(|v| v * scale);
    }

    fn run(&self, a: &mut Array2<Complex64>, row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        assert_eq!(a.dim(), (self.rows, self.cols), "grid shape does not match the FFT plan");
        let (rows, cols) = (self.rows, self.cols);
        let mut scratch =
            vec![Complex64::default(); row.get_inplace_scratch_len().max(col.get_inplace_scratch_len())];
        {
            let data = a.as_slice_mut().expect("standard layout");
            if cols > 1 {
                row.process_with_scratch(data, &mut scratch);
            }
        }
        if rows > 1 {
            let mut buf = vec![Complex64::default(); rows * cols];
            for ((r, c), v) in a.indexed_iter() {
                buf[c * rows + r] = *v;
            }
            col.process_with_scratch(&mut buf, &mut scratch);
            for ((r, c), v) in a.indexed_iter_mut() {
                *v = buf[c * rows + r];
            }
        }
    }
}

/// Sample frequencies in FFT order, like `numpy.fft.fftfreq`.
pub fn fftfreq(n: usize, spacing: f64) -> Vec<f64> {
    let half = (n as isize - 1) / 2;
    (0..n as isize)
        .map(|k| {
            let m = if k <= half { k } else { k - n as isize };
            m as f64 / (n as f64 * spacing)
        })
        .collect()
}

/// Integer frequency index for FFT bin `k` of an `n`-point transform.
pub fn bin_index(k: usize, n: usize) -> isize {
    let half = (n as isize - 1) / 2;
    let k = k as isize;
    if k <= half {
        k
    } else {
        k - n as isize
    }
}

/// Move the zero-frequency sample to the grid center.
pub fn fftshift<T: Clone>(a: &Array2<T>) -> Array2<T> {
    let (r, c) = a.dim();
    roll(a, (r / 2) as isize, (c / 2) as isize)
}

/// Inverse of [`fftshift`].
pub fn ifftshift<T: Clone>(a: &Array2<T>) -> Array2<T> {
    let (r, c) = a.dim();
    roll(a, -((r / 2) as isize), -((c / 2) as isize))
}

/// Circular shift: `out[i, j] = a[i - dr, j - dc]`.
pub fn roll<T: Clone>(a: &Array2<T>, dr: isize, dc: isize) -> Array2<T> {
    let (r, c) = a.dim();
    Array2::from_shape_fn((r, c), |(i, j)| {
        let si = (i as isize - dr).rem_euclid(r as isize) as usize;
        let sj = (j as isize - dc).rem_euclid(c as isize) as usize;
        a[[si, sj]].clone()
    })
}

//! Sampled complex wave fields and angular-spectrum propagation.

use ndarray::{s, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{fftfreq, fftshift, ifftshift, Fft2};

/// Sample spacing along each axis (m).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pitch {
    pub x: f64,
    pub y: f64,
}

impl Pitch {
    pub const fn square(p: f64) -> Self {
        Self { x: p, y: p }
    }
}

/// A 2D complex field sampled on a regular grid, indexed `[row, col]`
/// (`y`, `x`).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    pub grid: Array2<Complex64>,
    pub pitch: Pitch,
    pub wavelength: f64,
}

impl ComplexField {
    pub fn new(grid: Array2<Complex64>, pitch: Pitch, wavelength: f64) -> Result<Self> {
        let (r, c) = grid.dim();
        if r == 0 || c == 0 {
            return Err(Error::InvalidArgument("field grid must be non-empty".into()));
        }
        if !(pitch.x > 0.0 && pitch.y > 0.0 && pitch.x.is_finite() && pitch.y.is_finite()) {
            return Err(Error::InvalidArgument(format!("pitch must be positive, got {pitch:?}")));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        Ok(Self { grid, pitch, wavelength })
    }

    /// Real amplitude pattern (e.g. a binary SLM frame) under unit plane-wave
    /// illumination.
    pub fn from_amplitude(amplitude: &Array2<f64>, pitch: f64, wavelength: f64) -> Result<Self> {
        Self::new(amplitude.mapv(|a| Complex64::new(a, 0.0)), Pitch::square(pitch), wavelength)
    }

    pub fn dim(&self) -> (usize, usize) {
        self.grid.dim()
    }

    pub fn energy(&self) -> f64 {
        self.grid.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn intensity(&self) -> Array2<f64> {
        self.grid.mapv(|v| v.norm_sqr())
    }

    fn with_grid(&self, grid: Array2<Complex64>) -> Self {
        Self { grid, pitch: self.pitch, wavelength: self.wavelength }
    }
}

/// Time-multiplexed sequence of fields that share shape, pitch and
/// wavelength.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldStack {
    frames: Vec<ComplexField>,
}

impl FieldStack {
    pub fn new(frames: Vec<ComplexField>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidArgument("field stack needs at least one frame".into()))?;
        for (t, f) in frames.iter().enumerate() {
            if f.dim() != first.dim() || f.pitch != first.pitch || f.wavelength != first.wavelength {
                return Err(Error::ShapeMismatch(format!(
                    "frame {t} differs from frame 0 in shape, pitch or wavelength"
                )));
            }
        }
        Ok(Self { frames })
    }

    /// Binary (or any real) amplitude frames under plane-wave illumination.
    pub fn from_patterns(patterns: &[Array2<f64>], pitch: f64, wavelength: f64) -> Result<Self> {
        Self::new(
            patterns
                .iter()
                .map(|p| ComplexField::from_amplitude(p, pitch, wavelength))
                .collect::<Result<_>>()?,
        )
    }

    pub fn frames(&self) -> &[ComplexField] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.frames[0].dim()
    }

    pub fn pitch(&self) -> Pitch {
        self.frames[0].pitch
    }

    pub fn wavelength(&self) -> f64 {
        self.frames[0].wavelength
    }

    /// `1/T sum_t |u_t|^2`.
    pub fn mean_intensity(&self) -> Array2<f64> {
        let mut acc = Array2::zeros(self.dim());
        for f in &self.frames {
            acc.zip_mut_with(&f.grid, |a, v| *a += v.norm_sqr());
        }
        acc / self.frames.len() as f64
    }
}

/// Angular-spectrum transfer function sampled on an FFT-ordered frequency
/// grid.
#[derive(Clone, Debug)]
pub struct PropagationKernel {
    pub transfer: Array2<Complex64>,
    pub z: f64,
    pub sideband: bool,
}

impl PropagationKernel {
    /// `H = exp(i 2pi/lambda z sqrt(1 - (lambda fx)^2 - (lambda fy)^2))`,
    /// zero for evanescent frequencies and, with `sideband`, for `fy < 0`.
    pub fn new(shape: (usize, usize), pitch: Pitch, wavelength: f64, z: f64, sideband: bool) -> Self {
        let (rows, cols) = shape;
        let fx = fftfreq(cols, pitch.x);
        let fy = fftfreq(rows, pitch.y);
        let k = 2.0 * std::f64::consts::PI / wavelength;
        let transfer = Array2::from_shape_fn(shape, |(r, c)| {
            if sideband && fy[r] < 0.0 {
                return Complex64::default();
            }
            let arg = 1.0 - (wavelength * fx[c]).powi(2) - (wavelength * fy[r]).powi(2);
            if arg < 0.0 {
                Complex64::default()
            } else {
                Complex64::from_polar(1.0, k * z * arg.sqrt())
            }
        });
        Self { transfer, z, sideband }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.transfer.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Reusable angular-spectrum propagator for one grid shape and wavelength.
///
/// With padding enabled the field is zero-padded to twice its size before
/// the transfer function is applied and cropped afterwards, which removes
/// circular wrap-around.
#[derive(Clone, Debug)]
pub struct Propagator {
    shape: (usize, usize),
    padded: (usize, usize),
    offset: (usize, usize),
    pitch: Pitch,
    wavelength: f64,
    fft: Fft2,
}

impl Propagator {
    pub fn new(shape: (usize, usize), pitch: Pitch, wavelength: f64, pad: bool) -> Self {
        let padded = if pad { (2 * shape.0, 2 * shape.1) } else { shape };
        let offset = ((padded.0 - shape.0) / 2, (padded.1 - shape.1) / 2);
        Self { shape, padded, offset, pitch, wavelength, fft: Fft2::new(padded.0, padded.1) }
    }

    pub fn for_field(field: &ComplexField, pad: bool) -> Self {
        Self::new(field.dim(), field.pitch, field.wavelength, pad)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn padded_shape(&self) -> (usize, usize) {
        self.padded
    }

    pub fn pitch(&self) -> Pitch {
        self.pitch
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    pub fn kernel(&self, z: f64, sideband: bool) -> PropagationKernel {
        PropagationKernel::new(self.padded, self.pitch, self.wavelength, z, sideband)
    }

    pub fn pad(&self, grid: &Array2<Complex64>) -> Array2<Complex64> {
        if self.padded == self.shape {
            return grid.clone();
        }
        let mut out = Array2::zeros(self.padded);
        let (r0, c0) = self.offset;
        out.slice_mut(s![r0..r0 + self.shape.0, c0..c0 + self.shape.1]).assign(grid);
        out
    }

    pub fn crop(&self, padded: &Array2<Complex64>) -> Array2<Complex64> {
        if self.padded == self.shape {
            return padded.clone();
        }
        let (r0, c0) = self.offset;
        padded.slice(s![r0..r0 + self.shape.0, c0..c0 + self.shape.1]).to_owned()
    }

    /// Spectrum of the zero-padded input.
    pub fn spectrum(&self, grid: &Array2<Complex64>) -> Array2<Complex64> {
        let mut a = self.pad(grid);
        self.fft.forward(&mut a);
        a
    }

    /// Real-valued input variant of [`Self::spectrum`].
    pub fn spectrum_real(&self, grid: &Array2<f64>) -> Array2<Complex64> {
        self.spectrum(&grid.mapv(|v| Complex64::new(v, 0.0)))
    }

    /// Apply a kernel to a spectrum and return the padded-domain field.
    pub fn field_from_spectrum_padded(
        &self,
        spectrum: &Array2<Complex64>,
        kernel: &PropagationKernel,
    ) -> Array2<Complex64> {
        let mut a = spectrum * &kernel.transfer;
        self.fft.inverse(&mut a);
        a
    }

    pub fn field_from_spectrum(
        &self,
        spectrum: &Array2<Complex64>,
        kernel: &PropagationKernel,
    ) -> Array2<Complex64> {
        self.crop(&self.field_from_spectrum_padded(spectrum, kernel))
    }

    pub fn propagate(&self, grid: &Array2<Complex64>, kernel: &PropagationKernel) -> Array2<Complex64> {
        self.field_from_spectrum(&self.spectrum(grid), kernel)
    }

    /// `conj(H) . F(pad(g))`: one term of the adjoint, still in the spectral
    /// domain so several planes can be accumulated before one inverse FFT.
    pub fn adjoint_spectrum(&self, grid: &Array2<Complex64>, kernel: &PropagationKernel) -> Array2<Complex64> {
        let mut a = self.spectrum(grid);
        a.zip_mut_with(&kernel.transfer, |v, h| *v *= h.conj());
        a
    }

    /// Finish an accumulated adjoint: `crop(F^-1(spectrum))`.
    pub fn adjoint_from_spectrum(&self, mut spectrum: Array2<Complex64>) -> Array2<Complex64> {
        self.fft.inverse(&mut spectrum);
        self.crop(&spectrum)
    }

    /// Hermitian adjoint of [`Self::propagate`] for the same kernel.
    pub fn propagate_adjoint(
        &self,
        grid: &Array2<Complex64>,
        kernel: &PropagationKernel,
    ) -> Array2<Complex64> {
        self.adjoint_from_spectrum(self.adjoint_spectrum(grid, kernel))
    }
}

/// Angular-spectrum propagation over distance `z` with the default 2x zero
/// padding.
pub fn propagate_asm(field: &ComplexField, z: f64, sideband: bool) -> ComplexField {
    propagate_asm_with(field, z, sideband, true)
}

/// Angular-spectrum propagation; `pad = false` gives the circular (unpadded)
/// transform, which is exactly unitary on propagating frequencies.
pub fn propagate_asm_with(field: &ComplexField, z: f64, sideband: bool, pad: bool) -> ComplexField {
    let prop = Propagator::for_field(field, pad);
    let kernel = prop.kernel(z, sideband);
    field.with_grid(prop.propagate(&field.grid, &kernel))
}

/// Zero the `fy < 0` half of the spectrum. Idempotent.
pub fn apply_sideband(field: &ComplexField) -> ComplexField {
    let (rows, cols) = field.dim();
    let fft = Fft2::new(rows, cols);
    let fy = fftfreq(rows, field.pitch.y);
    let mut a = field.grid.clone();
    fft.forward(&mut a);
    for (r, f) in fy.iter().enumerate() {
        if *f < 0.0 {
            a.row_mut(r).fill(Complex64::default());
        }
    }
    fft.inverse(&mut a);
    field.with_grid(a)
}

/// Circular sub-pixel shift via a linear spectral phase:
/// `out(x, y) = image(x - dx, y - dy)`. Integer shifts reproduce array
/// rotation.
pub fn fourier_shift(image: &Array2<f64>, dx: f64, dy: f64) -> Array2<f64> {
    let (rows, cols) = image.dim();
    if dx == 0.0 && dy == 0.0 {
        return image.clone();
    }
    let fft = Fft2::new(rows, cols);
    let mut a = image.mapv(|v| Complex64::new(v, 0.0));
    fft.forward(&mut a);
    apply_shift_phase(&mut a, dx, dy);
    fft.inverse(&mut a);
    a.mapv(|v| v.re)
}

/// Multiply an FFT-ordered spectrum by the phase ramp of a `(dx, dy)` pixel
/// shift.
pub(crate) fn apply_shift_phase(spectrum: &mut Array2<Complex64>, dx: f64, dy: f64) {
    let (rows, cols) = spectrum.dim();
    let fx = fftfreq(cols, 1.0);
    let fy = fftfreq(rows, 1.0);
    let tau = 2.0 * std::f64::consts::PI;
    let px: Vec<Complex64> = fx.iter().map(|f| Complex64::from_polar(1.0, -tau * f * dx)).collect();
    let py: Vec<Complex64> = fy.iter().map(|f| Complex64::from_polar(1.0, -tau * f * dy)).collect();
    for ((r, c), v) in spectrum.indexed_iter_mut() {
        *v *= py[r] * px[c];
    }
}

/// Field in the back focal plane of an ideal lens of focal length `f`: a
/// unitary, DC-centered Fourier transform with output pitch
/// `lambda f / (N pitch)` per axis.
pub fn to_pupil_plane(field: &ComplexField, focal_length: f64) -> Result<ComplexField> {
    if !(focal_length > 0.0) {
        return Err(Error::InvalidArgument(format!("focal length must be positive, got {focal_length}")));
    }
    let (rows, cols) = field.dim();
    let fft = Fft2::new(rows, cols);
    let mut a = field.grid.clone();
    fft.forward_ortho(&mut a);
    let lf = field.wavelength * focal_length;
    ComplexField::new(
        fftshift(&a),
        Pitch { x: lf / (cols as f64 * field.pitch.x), y: lf / (rows as f64 * field.pitch.y) },
        field.wavelength,
    )
}

/// Inverse of [`to_pupil_plane`].
pub fn from_pupil_plane(pupil: &ComplexField, focal_length: f64) -> Result<ComplexField> {
    if !(focal_length > 0.0) {
        return Err(Error::InvalidArgument(format!("focal length must be positive, got {focal_length}")));
    }
    let (rows, cols) = pupil.dim();
    let fft = Fft2::new(rows, cols);
    let mut a = ifftshift(&pupil.grid);
    fft.inverse_ortho(&mut a);
    let lf = pupil.wavelength * focal_length;
    ComplexField::new(
        a,
        Pitch { x: lf / (cols as f64 * pupil.pitch.x), y: lf / (rows as f64 * pupil.pitch.y) },
        pupil.wavelength,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: f64 = 8.2e-6;
    const LAMBDA: f64 = 532e-9;

    fn random_field(rng: &mut ChaCha8Rng, r: usize, c: usize) -> ComplexField {
        let g = Array2::from_shape_fn((r, c), |_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        ComplexField::new(g, Pitch::square(P), LAMBDA).unwrap()
    }

    fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_distance_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_field(&mut rng, 16, 20);
        for pad in [true, false] {
            let v = propagate_asm_with(&u, 0.0, false, pad);
            let scale = u.grid.iter().map(|x| x.norm()).fold(0.0, f64::max);
            assert!(max_abs_diff(&u.grid, &v.grid) <= 1e-12 * scale);
        }
    }

    #[test]
    fn plane_wave_is_eigenfunction() {
        let u = ComplexField::new(Array2::from_elem((16, 16), Complex64::new(1.0, 0.0)), Pitch::square(P), LAMBDA)
            .unwrap();
        let v = propagate_asm_with(&u, 5e-3, false, false);
        let phase = v.grid[[0, 0]];
        for x in v.grid.iter() {
            assert!((x.norm() - 1.0).abs() < 1e-9);
            assert!((x - phase).norm() < 1e-9);
        }
    }

    #[test]
    fn kernel_is_bounded_and_filters() {
        let k = PropagationKernel::new((32, 32), Pitch::square(0.3e-6), LAMBDA, 1e-3, true);
        assert!(k.max_magnitude() <= 1.0 + 1e-15);
        let fy = fftfreq(32, 0.3e-6);
        let fx = fftfreq(32, 0.3e-6);
        for ((r, c), h) in k.transfer.indexed_iter() {
            let evanescent = 1.0 - (LAMBDA * fx[c]).powi(2) - (LAMBDA * fy[r]).powi(2) < 0.0;
            if fy[r] < 0.0 || evanescent {
                assert_eq!(*h, Complex64::default());
            }
        }
    }

    #[test]
    fn sideband_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random_field(&mut rng, 12, 10);
        let once = apply_sideband(&u);
        let twice = apply_sideband(&once);
        assert!(max_abs_diff(&once.grid, &twice.grid) < 1e-12);
    }

    #[test]
    fn sideband_removes_lower_half_spectrum() {
        // exp(-i 2 pi 3 y / 16) lives entirely at negative fy
        let g = Array2::from_shape_fn((16, 8), |(r, _)| {
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * 3.0 * r as f64 / 16.0)
        });
        let u = ComplexField::new(g, Pitch::square(P), LAMBDA).unwrap();
        let v = apply_sideband(&u);
        assert!(v.energy() < 1e-20);
    }

    #[test]
    fn sideband_keeps_half_of_white_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ratio = 0.0;
        let trials = 100;
        for _ in 0..trials {
            let g = Array2::from_shape_fn((32, 32), |_| Complex64::new(rng.gen::<f64>() - 0.5, 0.0));
            let u = ComplexField::new(g, Pitch::square(P), LAMBDA).unwrap();
            ratio += apply_sideband(&u).energy() / u.energy();
        }
        ratio /= trials as f64;
        // 16 of the 32 spectral rows have fy >= 0 and white noise spreads
        // its energy evenly over bins.
        assert!((ratio - 0.5).abs() < 0.02, "ratio {ratio}");
    }

    #[test]
    fn integer_fourier_shift_is_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let img = Array2::from_shape_fn((9, 12), |_| rng.gen::<f64>());
        let shifted = fourier_shift(&img, 3.0, 0.0);
        let rolled = crate::fft::roll(&img, 0, 3);
        for (a, b) in shifted.iter().zip(rolled.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        let shifted = fourier_shift(&img, -2.0, 5.0);
        let rolled = crate::fft::roll(&img, 5, -2);
        for (a, b) in shifted.iter().zip(rolled.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(fourier_shift(&img, 0.0, 0.0), img);
    }

    #[test]
    fn subpixel_shift_of_bandlimited_bump() {
        // Periodic sinc (Dirichlet kernel) with harmonics |k| <= 10 on 32 samples.
        let n = 32usize;
        let x0 = 13.3;
        let bump = |x: f64| -> f64 {
            (-10..=10)
                .map(|k| (2.0 * std::f64::consts::PI * k as f64 * (x - x0) / n as f64).cos())
                .sum::<f64>()
                / 21.0
        };
        let img = Array2::from_shape_fn((4, n), |(_, c)| bump(c as f64));
        let shifted = fourier_shift(&img, 0.5, 0.0);
        for ((_, c), v) in shifted.indexed_iter() {
            assert!((v - bump(c as f64 - 0.5)).abs() < 1e-6);
        }
    }

    #[test]
    fn pupil_plane_parseval_and_pitch() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_field(&mut rng, 24, 16);
        let p = to_pupil_plane(&u, 40e-3).unwrap();
        assert!((p.energy() - u.energy()).abs() <= 1e-9 * u.energy());
        assert!((p.pitch.x - LAMBDA * 40e-3 / (16.0 * P)).abs() < 1e-18);
        assert!((p.pitch.y - LAMBDA * 40e-3 / (24.0 * P)).abs() < 1e-18);
        let back = from_pupil_plane(&p, 40e-3).unwrap();
        assert!(max_abs_diff(&back.grid, &u.grid) < 1e-12);
        assert!(to_pupil_plane(&u, 0.0).is_err());
    }

    #[test]
    fn pupil_plane_of_plane_wave_is_central_peak() {
        let u = ComplexField::new(Array2::from_elem((16, 16), Complex64::new(1.0, 0.0)), Pitch::square(P), LAMBDA)
            .unwrap();
        let p = to_pupil_plane(&u, 40e-3).unwrap();
        let center: f64 = p.grid.slice(s![7..10, 7..10]).iter().map(|v| v.norm_sqr()).sum();
        assert!(center >= 0.99 * p.energy());
        assert!(p.grid[[8, 8]].norm_sqr() > 0.99 * p.energy());
    }

    #[test]
    fn pupil_intensity_ignores_lateral_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = random_field(&mut rng, 16, 16);
        let moved = u.with_grid(crate::fft::roll(&u.grid, 3, -5));
        let a = to_pupil_plane(&u, 40e-3).unwrap().intensity();
        let b = to_pupil_plane(&moved, 40e-3).unwrap().intensity();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn adjoint_identity() {
        // <P u, v> == <u, P^H v>
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_field(&mut rng, 10, 14);
        let v = random_field(&mut rng, 10, 14);
        for (pad, sb) in [(true, true), (true, false), (false, true)] {
            let prop = Propagator::for_field(&u, pad);
            let k = prop.kernel(2e-3, sb);
            let pu = prop.propagate(&u.grid, &k);
            let phv = prop.propagate_adjoint(&v.grid, &k);
            let lhs: Complex64 = pu.iter().zip(v.grid.iter()).map(|(a, b)| a * b.conj()).sum();
            let rhs: Complex64 = u.grid.iter().zip(phv.iter()).map(|(a, b)| a * b.conj()).sum();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn stack_rejects_mismatched_frames() {
        let a = ComplexField::from_amplitude(&Array2::zeros((4, 4)), P, LAMBDA).unwrap();
        let b = ComplexField::from_amplitude(&Array2::zeros((4, 5)), P, LAMBDA).unwrap();
        assert!(FieldStack::new(vec![a.clone(), b]).is_err());
        assert!(FieldStack::new(vec![]).is_err());
        assert_eq!(FieldStack::new(vec![a.clone(), a]).unwrap().len(), 2);
    }

    #[test]
    fn identical_frames_average_to_single_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let u = random_field(&mut rng, 6, 6);
        let stack = FieldStack::new(vec![u.clone(); 4]).unwrap();
        for (a, b) in stack.mean_intensity().iter().zip(u.intensity().iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}

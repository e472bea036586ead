//! Supervision losses on time-averaged amplitudes and their gradients with
//! respect to the real SLM amplitude of every frame.
//!
//! For reconstructed intensity `I = 1/T sum_t |u_t|^2` at a plane (or in a
//! view) the reconstructed amplitude is `A = sqrt(I + eps)` and the loss is
//! the mean squared error between `s A` and the target amplitude. The scale
//! `s` is either fixed or refit in closed form; the refit is a stationary
//! point of the loss in `s`, so the gradient treats it as a constant.

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optics::PlaneDepth;
use crate::targets::lightfield::{StftParams, StftPlan};
use crate::targets::masks::MaskSet;
use crate::wave::{FieldStack, Pitch, PropagationKernel, Propagator};

/// Added to intensities before the square root.
pub const AMPLITUDE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupervisionMode {
    TwoPointFiveD,
    ThreeD,
    FourD,
}

/// Single-channel supervision payload.
#[derive(Clone, Debug, PartialEq)]
pub enum Supervision {
    /// All-in-focus amplitude, compared inside the nearest-plane mask of
    /// every plane.
    Masked { amplitude: Array2<f64>, masks: MaskSet, planes: Vec<PlaneDepth> },
    /// One target amplitude per focal plane.
    FocalStack { amplitudes: Vec<Array2<f64>>, planes: Vec<PlaneDepth> },
    /// One target amplitude per STFT view, at the patch-grid resolution,
    /// compared with the STFT of the field at the WRP.
    LightField { amplitudes: Vec<Array2<f64>>, stft: StftParams, wrp_distance: f64 },
}

impl Supervision {
    pub fn mode(&self) -> SupervisionMode {
        match self {
            Supervision::Masked { .. } => SupervisionMode::TwoPointFiveD,
            Supervision::FocalStack { .. } => SupervisionMode::ThreeD,
            Supervision::LightField { .. } => SupervisionMode::FourD,
        }
    }
}

/// Least-squares scale `sum(r t) / sum(r^2)`; 1 when the reconstruction has
/// no energy.
pub fn fit_scale(recon: &Array2<f64>, target: &Array2<f64>) -> f64 {
    scale_from_sums(Zip::from(recon).and(target).fold(0.0, |acc, r, t| acc + r * t), recon.iter().map(|r| r * r).sum())
}

fn scale_from_sums(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        log::warn!("reconstruction has zero energy; using scale 1");
        1.0
    }
}

/// Loss value, fitted or fixed scale, per-frame gradient `dL/dq` and the
/// reconstructed amplitudes (per plane or per view).
#[derive(Clone, Debug)]
pub struct LossEval {
    pub loss: f64,
    pub scale: f64,
    pub grad: Vec<Array2<f64>>,
    pub amplitudes: Vec<Array2<f64>>,
}

/// Precomputed propagation and STFT machinery for one channel's
/// supervision.
#[derive(Clone, Debug)]
pub struct LossModel {
    propagator: Propagator,
    kernels: Vec<PropagationKernel>,
    plan: Option<StftPlan>,
    targets: Vec<Array2<f64>>,
    masks: Option<Vec<Array2<f64>>>,
    shape: (usize, usize),
}

impl LossModel {
    pub fn new(
        shape: (usize, usize),
        pitch: Pitch,
        wavelength: f64,
        sideband: bool,
        supervision: &Supervision,
    ) -> Result<Self> {
        let propagator = Propagator::new(shape, pitch, wavelength, true);
        let check = |grids: &[Array2<f64>], want: (usize, usize), what: &str| -> Result<()> {
            if let Some(g) = grids.iter().find(|g| g.dim() != want) {
                return Err(Error::ShapeMismatch(format!("{what} is {:?}, expected {want:?}", g.dim())));
            }
            Ok(())
        };
        let (kernels, plan, targets, masks) = match supervision {
            Supervision::Masked { amplitude, masks, planes } => {
                if masks.len() != planes.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "{} masks for {} planes",
                        masks.len(),
                        planes.len()
                    )));
                }
                check(std::slice::from_ref(amplitude), shape, "target amplitude")?;
                check(&masks.masks, shape, "mask")?;
                let k = planes.iter().map(|p| propagator.kernel(p.distance_from_slm, sideband)).collect();
                (k, None, vec![amplitude.clone(); planes.len()], Some(masks.masks.clone()))
            }
            Supervision::FocalStack { amplitudes, planes } => {
                if amplitudes.len() != planes.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "{} focal slices for {} planes",
                        amplitudes.len(),
                        planes.len()
                    )));
                }
                check(amplitudes, shape, "focal slice")?;
                let k = planes.iter().map(|p| propagator.kernel(p.distance_from_slm, sideband)).collect();
                (k, None, amplitudes.clone(), None)
            }
            Supervision::LightField { amplitudes, stft, wrp_distance } => {
                let plan = StftPlan::new(shape, *stft)?;
                if amplitudes.len() != plan.num_views() {
                    return Err(Error::ShapeMismatch(format!(
                        "{} target views for a {}x{} STFT view grid",
                        amplitudes.len(),
                        stft.n_views.0,
                        stft.n_views.1
                    )));
                }
                check(amplitudes, plan.patch_grid(), "target view")?;
                (vec![propagator.kernel(*wrp_distance, sideband)], Some(plan), amplitudes.clone(), None)
            }
        };
        Ok(Self { propagator, kernels, plan, targets, masks, shape })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn stft_plan(&self) -> Option<&StftPlan> {
        self.plan.as_ref()
    }

    /// Target amplitudes per plane or view.
    pub fn targets(&self) -> &[Array2<f64>] {
        &self.targets
    }

    /// Evaluate on real SLM amplitudes.
    pub fn evaluate(&self, patterns: &[Array2<f64>], scale: Option<f64>) -> Result<LossEval> {
        let fields: Vec<Array2<Complex64>> = patterns.iter().map(|p| p.mapv(|v| Complex64::new(v, 0.0))).collect();
        self.evaluate_fields(&fields, scale)
    }

    /// Evaluate on complex SLM fields; the gradient is taken with respect to
    /// their real part.
    pub fn evaluate_fields(&self, fields: &[Array2<Complex64>], scale: Option<f64>) -> Result<LossEval> {
        if fields.is_empty() {
            return Err(Error::InvalidArgument("need at least one frame".into()));
        }
        if let Some(f) = fields.iter().find(|f| f.dim() != self.shape) {
            return Err(Error::ShapeMismatch(format!("frame is {:?}, model expects {:?}", f.dim(), self.shape)));
        }
        let n_frames = fields.len() as f64;
        let prop = &self.propagator;

        // Forward: fields at every plane, per frame.
        let planes: Vec<Vec<Array2<Complex64>>> = fields
            .par_iter()
            .map(|u| {
                let spec = prop.spectrum(u);
                self.kernels.iter().map(|k| prop.field_from_spectrum(&spec, k)).collect()
            })
            .collect();
        let coeffs: Option<Vec<Vec<Array2<Complex64>>>> = self.plan.as_ref().map(|plan| {
            planes.par_iter().map(|p| plan.analyze(&p[0]).expect("shape checked")).collect()
        });

        // Time-averaged intensities per plane or view, summed in frame order.
        let intensities: Vec<Array2<f64>> = match (&self.plan, &coeffs) {
            (Some(plan), Some(coeffs)) => {
                let per_frame: Vec<Vec<Array2<f64>>> = coeffs.par_iter().map(|c| plan.view_intensities(c)).collect();
                average(per_frame, n_frames)
            }
            _ => {
                let per_frame: Vec<Vec<Array2<f64>>> =
                    planes.par_iter().map(|p| p.iter().map(|u| u.mapv(|v| v.norm_sqr())).collect()).collect();
                average(per_frame, n_frames)
            }
        };
        let amplitudes: Vec<Array2<f64>> = intensities.iter().map(|i| i.mapv(|v| (v + AMPLITUDE_EPS).sqrt())).collect();

        let mask = |k: usize| self.masks.as_ref().map(|m| &m[k]);
        let s = match scale {
            Some(s) => s,
            None => {
                let (mut num, mut den) = (0.0, 0.0);
                for (k, (a, tgt)) in amplitudes.iter().zip(&self.targets).enumerate() {
                    match mask(k) {
                        Some(m) => Zip::from(a).and(tgt).and(m).for_each(|&a, &t, &m| {
                            num += m * a * t;
                            den += m * a * a;
                        }),
                        None => Zip::from(a).and(tgt).for_each(|&a, &t| {
                            num += a * t;
                            den += a * a;
                        }),
                    }
                }
                scale_from_sums(num, den)
            }
        };

        let n_terms = amplitudes.len() as f64;
        let n_px = amplitudes[0].len() as f64;
        let norm = 1.0 / (n_terms * n_px);
        let mut loss = 0.0;
        // dL/dI per plane or view, divided by T.
        let mut weights = Vec::with_capacity(amplitudes.len());
        for (k, (a, tgt)) in amplitudes.iter().zip(&self.targets).enumerate() {
            let mut w = Array2::zeros(a.dim());
            let m = mask(k);
            Zip::indexed(&mut w).and(a).and(tgt).for_each(|idx, w, &a, &t| {
                let mk = m.map_or(1.0, |m| m[idx]);
                let r = mk * (s * a - t);
                loss += r * r;
                let dl_da = 2.0 * norm * r * mk * s;
                *w = dl_da / (2.0 * a) / n_frames;
            });
            weights.push(w);
        }
        loss *= norm;

        // Backward: per frame, adjoint of propagation (and the STFT).
        let grad: Vec<Array2<f64>> = (0..fields.len())
            .into_par_iter()
            .map(|f| {
                let acc = match (&self.plan, &coeffs) {
                    (Some(plan), Some(coeffs)) => {
                        let g = plan.backproject(&coeffs[f], &weights);
                        prop.adjoint_spectrum(&g, &self.kernels[0])
                    }
                    _ => {
                        let mut acc: Option<Array2<Complex64>> = None;
                        for (k, kernel) in self.kernels.iter().enumerate() {
                            let mut g = planes[f][k].clone();
                            g.zip_mut_with(&weights[k], |u, &w| *u *= 2.0 * w);
                            let term = prop.adjoint_spectrum(&g, kernel);
                            match acc.as_mut() {
                                Some(a) => *a += &term,
                                None => acc = Some(term),
                            }
                        }
                        acc.expect("at least one plane")
                    }
                };
                prop.adjoint_from_spectrum(acc).mapv(|v| v.re)
            })
            .collect();

        Ok(LossEval { loss, scale: s, grad, amplitudes })
    }
}

fn average(per_frame: Vec<Vec<Array2<f64>>>, t: f64) -> Vec<Array2<f64>> {
    let mut it = per_frame.into_iter();
    let mut acc = it.next().expect("at least one frame");
    for frame in it {
        for (a, b) in acc.iter_mut().zip(frame) {
            *a += &b;
        }
    }
    for a in &mut acc {
        *a /= t;
    }
    acc
}

fn real_patterns(stack: &FieldStack) -> Vec<Array2<Complex64>> {
    stack.frames().iter().map(|f| f.grid.clone()).collect()
}

/// 2.5D loss of an SLM stack against a masked all-in-focus amplitude.
pub fn loss_2p5d(
    stack: &FieldStack,
    amplitude: &Array2<f64>,
    masks: &MaskSet,
    planes: &[PlaneDepth],
    sideband: bool,
    scale: Option<f64>,
) -> Result<LossEval> {
    let sup = Supervision::Masked { amplitude: amplitude.clone(), masks: masks.clone(), planes: planes.to_vec() };
    LossModel::new(stack.dim(), stack.pitch(), stack.wavelength(), sideband, &sup)?
        .evaluate_fields(&real_patterns(stack), scale)
}

/// 3D loss against one target amplitude per focal plane.
pub fn loss_3d(
    stack: &FieldStack,
    amplitudes: &[Array2<f64>],
    planes: &[PlaneDepth],
    sideband: bool,
    scale: Option<f64>,
) -> Result<LossEval> {
    let sup = Supervision::FocalStack { amplitudes: amplitudes.to_vec(), planes: planes.to_vec() };
    LossModel::new(stack.dim(), stack.pitch(), stack.wavelength(), sideband, &sup)?
        .evaluate_fields(&real_patterns(stack), scale)
}

/// 4D loss against per-view amplitudes on the STFT patch grid.
pub fn loss_4d(
    stack: &FieldStack,
    amplitudes: &[Array2<f64>],
    stft: StftParams,
    wrp_distance: f64,
    sideband: bool,
    scale: Option<f64>,
) -> Result<LossEval> {
    let sup = Supervision::LightField { amplitudes: amplitudes.to_vec(), stft, wrp_distance };
    LossModel::new(stack.dim(), stack.pitch(), stack.wavelength(), sideband, &sup)?
        .evaluate_fields(&real_patterns(stack), scale)
}

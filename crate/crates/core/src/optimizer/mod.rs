//! Gradient-descent synthesis of time-multiplexed binary SLM frames.

pub mod adam;
pub mod loss;
pub mod quantize;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{OpticalConfig, PlaneDepth};
use crate::targets::lightfield::{LightField, StftParams, StftPlan};
use crate::targets::masks::closest_distance_masks;
use crate::targets::{amplitude_of, FocalStack, RgbdTarget};
use crate::wave::Pitch;

pub use adam::Adam;
pub use loss::{fit_scale, loss_2p5d, loss_3d, loss_4d, LossEval, LossModel, Supervision, SupervisionMode};
pub use quantize::{quantize_hard, quantize_relaxed, relax_with_noise, unit_surrogate, Surrogate, LOGIT_GAIN};

/// Geometric temperature decay with a floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureSchedule {
    pub start: f64,
    pub decay: f64,
    pub min: f64,
}

impl Default for TemperatureSchedule {
    fn default() -> Self {
        Self { start: 1.0, decay: 0.999, min: 0.1 }
    }
}

impl TemperatureSchedule {
    pub fn at(&self, iteration: usize) -> f64 {
        (self.start * self.decay.powi(iteration as i32)).max(self.min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Adam step size in logit units; defaults from the frame count when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<f64>,
    pub iterations: usize,
    #[serde(default = "default_surrogate")]
    pub surrogate: Surrogate,
    #[serde(default)]
    pub temperature: TemperatureSchedule,
    #[serde(default)]
    pub seed: u64,
}

fn default_surrogate() -> Surrogate {
    Surrogate::Gumbel
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            step_size: None,
            iterations: 2000,
            surrogate: Surrogate::Gumbel,
            temperature: TemperatureSchedule::default(),
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be at least 1".into()));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::InvalidConfig(format!("seed must be at most {}, got {}", i64::MAX, self.seed)));
        }
        if let Some(a) = self.step_size {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidConfig(format!("step size must be positive, got {a}")));
            }
        }
        let t = &self.temperature;
        if !(t.start > 0.0 && t.min > 0.0 && t.decay > 0.0 && t.decay <= 1.0) {
            return Err(Error::InvalidConfig("temperature schedule needs start, min > 0 and decay in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn step_size_for(&self, frames: usize) -> f64 {
        self.step_size.unwrap_or_else(|| default_step_size(frames))
    }
}

/// 0.1 for up to two frames, 0.4 from eight frames, linear in between.
pub fn default_step_size(frames: usize) -> f64 {
    match frames {
        0..=2 => 0.1,
        t if t >= 8 => 0.4,
        t => 0.1 + 0.05 * (t as f64 - 2.0),
    }
}

/// Pre-quantization values of every frame plus the optimizer clock.
#[derive(Clone, Debug, PartialEq)]
pub struct SlmVariables {
    pub a: Vec<Array2<f64>>,
    pub temperature: f64,
    pub iteration: usize,
}

impl SlmVariables {
    /// Uniform(0, 1) initialization.
    pub fn random(frames: usize, shape: (usize, usize), rng: &mut impl Rng) -> Self {
        let a = (0..frames).map(|_| Array2::from_shape_simple_fn(shape, || rng.gen::<f64>())).collect();
        Self { a, temperature: 1.0, iteration: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub loss: f64,
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub variables: SlmVariables,
    /// Hard binary frames of the final variables.
    pub frames: Vec<Array2<f64>>,
    /// Training loss of the pattern actually propagated at each iteration.
    pub trace: Vec<TraceEntry>,
    /// Loss of the thresholded initial and final variables.
    pub initial_loss: f64,
    pub final_loss: f64,
    pub scale: f64,
}

/// Optimize the frames of one channel. Deterministic for a fixed seed and
/// `stream` (the channel index in multi-channel runs).
pub fn optimize_channel(
    model: &LossModel,
    frames: usize,
    opt: &OptimizerConfig,
    stream: u64,
    init: Option<SlmVariables>,
) -> Result<OptimizeResult> {
    opt.validate()?;
    if frames == 0 {
        return Err(Error::InvalidArgument("need at least one frame".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    rng.set_stream(stream);
    let mut vars = match init {
        Some(v) => {
            if v.a.len() != frames || v.a.iter().any(|a| a.dim() != model.shape()) {
                return Err(Error::ShapeMismatch("initial variables do not match the model".into()));
            }
            v
        }
        None => SlmVariables::random(frames, model.shape(), &mut rng),
    };
    let initial = model.evaluate(&vars.a.iter().map(quantize_hard).collect::<Vec<_>>(), None)?;
    // The step size is in logit units: a change of `da` moves the logit by
    // `2 k da`.
    let mut adam = Adam::new(opt.step_size_for(frames) / (2.0 * LOGIT_GAIN), &vec![model.shape(); frames]);
    let mut trace = Vec::with_capacity(opt.iterations);
    let start = vars.iteration;
    for k in start..start + opt.iterations {
        let tau = opt.temperature.at(k);
        let (patterns, dq): (Vec<_>, Vec<_>) = match opt.surrogate {
            Surrogate::Gumbel => vars
                .a
                .iter()
                .map(|a| {
                    let noise = quantize::logistic_noise(a.dim(), &mut rng);
                    let r = relax_with_noise(a, tau, &noise);
                    (r.forward, r.grad)
                })
                .unzip(),
            Surrogate::Unit => vars.a.iter().map(unit_surrogate).unzip(),
        };
        let eval = model.evaluate(&patterns, None)?;
        if !eval.loss.is_finite() {
            return Err(Error::Diverged { iteration: k, loss: eval.loss });
        }
        trace.push(TraceEntry { iteration: k, loss: eval.loss, scale: eval.scale });
        let grads: Vec<Array2<f64>> = eval.grad.iter().zip(&dq).map(|(g, d)| g * d).collect();
        adam.step(&mut vars.a, &grads);
        vars.temperature = tau;
        vars.iteration = k + 1;
        if (k - start) % 100 == 0 {
            log::debug!("iteration {k}: loss {:.6e}, scale {:.4}, tau {tau:.4}", eval.loss, eval.scale);
        }
    }
    let frames_out: Vec<Array2<f64>> = vars.a.iter().map(quantize_hard).collect();
    let fin = model.evaluate(&frames_out, None)?;
    if !fin.loss.is_finite() {
        return Err(Error::Diverged { iteration: vars.iteration, loss: fin.loss });
    }
    Ok(OptimizeResult {
        variables: vars,
        frames: frames_out,
        trace,
        initial_loss: initial.loss,
        final_loss: fin.loss,
        scale: fin.scale,
    })
}

/// Optimize every channel of a configuration, one supervision per channel.
pub fn optimize(cfg: &OpticalConfig, supervision: &[Supervision], opt: &OptimizerConfig) -> Result<Vec<OptimizeResult>> {
    cfg.validate()?;
    if supervision.len() != cfg.num_channels() {
        return Err(Error::ShapeMismatch(format!(
            "{} supervision targets for {} channels",
            supervision.len(),
            cfg.num_channels()
        )));
    }
    let shape = cfg.active_resolution.shape();
    supervision
        .iter()
        .enumerate()
        .map(|(c, sup)| {
            let model = LossModel::new(shape, Pitch::square(cfg.pixel_pitch), cfg.wavelength(c)?, cfg.sideband, sup)?;
            log::info!("optimizing channel {c} ({:.0} nm)", cfg.wavelength(c)? * 1e9);
            optimize_channel(&model, cfg.num_frames, opt, c as u64, None)
        })
        .collect()
}

/// 2.5D supervision for one channel of an RGB-D target.
pub fn supervision_2p5d(target: &RgbdTarget, channel: usize, planes: &[PlaneDepth]) -> Result<Supervision> {
    let diopters: Vec<f64> = planes.iter().map(|p| p.diopters).collect();
    Ok(Supervision::Masked {
        amplitude: target.amplitude[channel].clone(),
        masks: closest_distance_masks(&target.depth, &diopters)?,
        planes: planes.to_vec(),
    })
}

/// 3D supervision from a focal stack of intensities.
pub fn supervision_3d(stack: &FocalStack, planes: &[PlaneDepth]) -> Result<Supervision> {
    if stack.len() != planes.len() {
        return Err(Error::ShapeMismatch(format!("{} slices for {} planes", stack.len(), planes.len())));
    }
    Ok(Supervision::FocalStack { amplitudes: stack.slices.iter().map(amplitude_of).collect(), planes: planes.to_vec() })
}

/// Average a full-resolution image over every STFT patch.
pub fn patch_average(image: &Array2<f64>, params: StftParams) -> Array2<f64> {
    let (w, hop) = (params.window, params.hop);
    let (rows, cols) = image.dim();
    let grid = ((rows - w) / hop + 1, (cols - w) / hop + 1);
    Array2::from_shape_fn(grid, |(i, j)| {
        image.slice(ndarray::s![i * hop..i * hop + w, j * hop..j * hop + w]).mean().unwrap_or(0.0)
    })
}

/// 4D supervision from a light field of intensities at SLM resolution.
/// Views are averaged over each STFT patch.
pub fn supervision_4d(lf: &LightField, stft: StftParams, wrp_distance: f64) -> Result<Supervision> {
    let (nu, nv) = stft.n_views;
    if (lf.n_u, lf.n_v) != (nu, nv) {
        return Err(Error::ShapeMismatch(format!(
            "light field has {}x{} views, STFT expects {nu}x{nv}",
            lf.n_u, lf.n_v
        )));
    }
    StftPlan::new(lf.dim(), stft)?;
    let amplitudes = lf.views.iter().map(|v| amplitude_of(&patch_average(v, stft))).collect();
    Ok(Supervision::LightField { amplitudes, stft, wrp_distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::plane_depths;
    use crate::targets::lightfield::StftPlan;
    use crate::wave::FieldStack;
    use num_complex::Complex64;

    const P: f64 = 8.2e-6;
    const L: f64 = 520e-9;

    fn cfg() -> OpticalConfig {
        OpticalConfig::prototype()
    }

    fn rand_grid(shape: (usize, usize), rng: &mut ChaCha8Rng) -> Array2<f64> {
        Array2::from_shape_simple_fn(shape, || rng.gen::<f64>())
    }

    /// Central differences of `loss(a)` against `grad`, for a soft-path
    /// model `a -> soft Gumbel sample -> loss`.
    fn check_gradient(model: &LossModel, frames: usize, seed: u64, scale: Option<f64>) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = model.shape();
        let a: Vec<Array2<f64>> = (0..frames).map(|_| rand_grid(shape, &mut rng)).collect();
        let noise: Vec<Array2<f64>> = (0..frames).map(|_| quantize::logistic_noise(shape, &mut rng)).collect();
        let tau = 2.0;
        let soft = |a: &[Array2<f64>]| -> Vec<quantize::Relaxed> {
            a.iter().zip(&noise).map(|(a, n)| relax_with_noise(a, tau, n)).collect()
        };
        let r = soft(&a);
        let q: Vec<Array2<f64>> = r.iter().map(|r| r.soft.clone()).collect();
        let eval = model.evaluate(&q, scale).unwrap();
        let s = eval.scale;
        let grad: Vec<Array2<f64>> = eval.grad.iter().zip(&r).map(|(g, r)| g * &r.grad).collect();
        let loss_at = |a: &[Array2<f64>]| {
            let q: Vec<Array2<f64>> = soft(a).into_iter().map(|r| r.soft).collect();
            model.evaluate(&q, Some(s)).unwrap().loss
        };
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for f in 0..frames {
            for idx in [(0, 0), (shape.0 / 2, shape.1 / 3), (shape.0 - 1, shape.1 - 1), (1, shape.1 / 2)] {
                let mut up = a.clone();
                up[f][idx] += h;
                let mut dn = a.clone();
                dn[f][idx] -= h;
                let fd = (loss_at(&up) - loss_at(&dn)) / (2.0 * h);
                worst = worst.max((fd - grad[f][idx]).abs());
            }
        }
        worst
    }

    fn model(sup: &Supervision, shape: (usize, usize)) -> LossModel {
        LossModel::new(shape, Pitch::square(P), L, true, sup).unwrap()
    }

    fn sup_2p5d(shape: (usize, usize), seed: u64) -> Supervision {
        let cfg = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let planes = plane_depths(&cfg, 2).unwrap();
        let depth = Array2::from_shape_simple_fn(shape, || rng.gen::<f64>() * cfg.d_ncp());
        let target = RgbdTarget::new(vec![rand_grid(shape, &mut rng)], depth, cfg.d_ncp()).unwrap();
        supervision_2p5d(&target, 0, &planes).unwrap()
    }

    #[test]
    fn gradient_2p5d_matches_finite_differences() {
        let m = model(&sup_2p5d((8, 8), 1), (8, 8));
        let err = check_gradient(&m, 2, 2, None);
        assert!(err <= 1e-4, "max abs error {err}");
    }

    #[test]
    fn gradient_3d_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let planes = plane_depths(&cfg(), 3).unwrap();
        let sup = Supervision::FocalStack {
            amplitudes: (0..3).map(|_| rand_grid((8, 8), &mut rng)).collect(),
            planes,
        };
        let err = check_gradient(&model(&sup, (8, 8)), 2, 4, None);
        assert!(err <= 1e-4, "max abs error {err}");
    }

    #[test]
    fn gradient_4d_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let stft = StftParams { window: 8, hop: 4, n_views: (3, 3), sideband: true };
        let plan = StftPlan::new((16, 16), stft).unwrap();
        let sup = Supervision::LightField {
            amplitudes: (0..9).map(|_| rand_grid(plan.patch_grid(), &mut rng)).collect(),
            stft,
            wrp_distance: cfg().wrp_distance,
        };
        let err = check_gradient(&model(&sup, (16, 16)), 2, 6, None);
        assert!(err <= 1e-4, "max abs error {err}");
    }

    fn stack_of(patterns: &[Array2<f64>]) -> FieldStack {
        FieldStack::from_patterns(patterns, P, L).unwrap()
    }

    #[test]
    fn exact_target_gives_zero_loss_and_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let planes = plane_depths(&cfg(), 2).unwrap();
        let q: Vec<Array2<f64>> = (0..2).map(|_| quantize_hard(&rand_grid((8, 8), &mut rng))).collect();
        let probe = Supervision::FocalStack { amplitudes: vec![Array2::zeros((8, 8)); 2], planes: planes.clone() };
        let recon = model(&probe, (8, 8)).evaluate(&q, Some(1.0)).unwrap().amplitudes;
        let eval = loss_3d(&stack_of(&q), &recon, &planes, true, Some(1.0)).unwrap();
        assert_eq!(eval.loss, 0.0);
        assert!(eval.grad.iter().flatten().all(|&g| g == 0.0));
    }

    #[test]
    fn zero_masks_give_zero_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let planes = plane_depths(&cfg(), 2).unwrap();
        let Supervision::Masked { amplitude, mut masks, .. } = sup_2p5d((8, 8), 9) else { unreachable!() };
        for m in &mut masks.masks {
            m.fill(0.0);
        }
        let q = vec![rand_grid((8, 8), &mut rng)];
        let eval = loss_2p5d(&stack_of(&q), &amplitude, &masks, &planes, true, None).unwrap();
        assert_eq!(eval.loss, 0.0);
        assert!(eval.grad.iter().flatten().all(|&g| g == 0.0));
    }

    #[test]
    fn single_plane_3d_equals_unmasked_2p5d() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let planes = vec![plane_depths(&cfg(), 3).unwrap()[1]];
        let amp = rand_grid((8, 8), &mut rng);
        let q = vec![rand_grid((8, 8), &mut rng), rand_grid((8, 8), &mut rng)];
        let masks = closest_distance_masks(&Array2::zeros((8, 8)), &[planes[0].diopters]).unwrap();
        let a = loss_2p5d(&stack_of(&q), &amp, &masks, &planes, true, None).unwrap();
        let b = loss_3d(&stack_of(&q), &[amp], &planes, true, None).unwrap();
        assert!((a.loss - b.loss).abs() <= 1e-12);
    }

    #[test]
    fn zero_target_4d_loss_is_mean_squared_amplitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let stft = StftParams { window: 8, hop: 8, n_views: (3, 3), sideband: true };
        let plan = StftPlan::new((16, 16), stft).unwrap();
        let zeros = vec![Array2::zeros(plan.patch_grid()); 9];
        let q = vec![rand_grid((16, 16), &mut rng)];
        let eval = loss_4d(&stack_of(&q), &zeros, stft, cfg().wrp_distance, true, Some(1.0)).unwrap();
        let n: usize = eval.amplitudes.iter().map(|a| a.len()).sum();
        let msa = eval.amplitudes.iter().flatten().map(|a| a * a).sum::<f64>() / n as f64;
        assert!((eval.loss - msa).abs() <= 1e-12 * msa.max(1.0));
        assert!(loss_4d(&stack_of(&q), &zeros[..4], stft, cfg().wrp_distance, true, None).is_err());
    }

    #[test]
    fn fit_scale_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let r = rand_grid((6, 6), &mut rng);
        assert!((fit_scale(&r, &(&r * 2.0)) - 2.0).abs() < 1e-12);
        assert!((fit_scale(&r, &r) - 1.0).abs() < 1e-12);
        assert_eq!(fit_scale(&Array2::zeros((2, 2)), &r.slice(ndarray::s![..2, ..2]).to_owned()), 1.0);
        let t = rand_grid((6, 6), &mut rng);
        let s = fit_scale(&r, &t);
        let mse = |s: f64| (&r * s - &t).mapv(|v| v * v).sum();
        let best = (0..=200_000).map(|i| i as f64 * 1e-5).min_by(|a, b| mse(*a).total_cmp(&mse(*b))).unwrap();
        assert!((s - best).abs() <= 1e-5);
        assert!(mse(s) <= mse(best) + 1e-12);
    }

    #[test]
    fn doubling_target_doubles_scale_and_keeps_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let planes = plane_depths(&cfg(), 2).unwrap();
        let amps: Vec<Array2<f64>> = (0..2).map(|_| rand_grid((8, 8), &mut rng)).collect();
        let q = vec![quantize_hard(&rand_grid((8, 8), &mut rng))];
        let a = loss_3d(&stack_of(&q), &amps, &planes, true, None).unwrap();
        let doubled: Vec<Array2<f64>> = amps.iter().map(|a| a * 2.0).collect();
        let b = loss_3d(&stack_of(&q), &doubled, &planes, true, None).unwrap();
        assert!((b.scale - 2.0 * a.scale).abs() <= 1e-9 * a.scale);
        // MSE scales with the square of the target.
        assert!((b.loss / 4.0 - a.loss).abs() <= 1e-9 * a.loss.max(1e-300));
    }

    #[test]
    fn identical_frames_average_to_one_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let q = quantize_hard(&rand_grid((8, 8), &mut rng));
        let planes = plane_depths(&cfg(), 2).unwrap();
        let sup = Supervision::FocalStack { amplitudes: vec![Array2::zeros((8, 8)); 2], planes };
        let m = model(&sup, (8, 8));
        let one = m.evaluate(&[q.clone()], Some(1.0)).unwrap();
        let three = m.evaluate(&[q.clone(), q.clone(), q], Some(1.0)).unwrap();
        for (a, b) in one.amplitudes.iter().zip(&three.amplitudes) {
            assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn zero_gradient_leaves_variables_unchanged() {
        let Supervision::Masked { amplitude, mut masks, planes } = sup_2p5d((8, 8), 15) else { unreachable!() };
        for m in &mut masks.masks {
            m.fill(0.0);
        }
        let m = model(&Supervision::Masked { amplitude, masks, planes }, (8, 8));
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let init = SlmVariables::random(2, (8, 8), &mut rng);
        let opt = OptimizerConfig { iterations: 20, ..Default::default() };
        let out = optimize_channel(&m, 2, &opt, 0, Some(init.clone())).unwrap();
        assert_eq!(out.variables.a, init.a);
    }

    #[test]
    fn seeded_runs_are_bit_identical_and_binary() {
        let m = model(&sup_2p5d((16, 16), 17), (16, 16));
        let opt = OptimizerConfig { iterations: 15, seed: 3, ..Default::default() };
        let a = optimize_channel(&m, 2, &opt, 0, None).unwrap();
        let b = optimize_channel(&m, 2, &opt, 0, None).unwrap();
        assert_eq!(a.variables.a, b.variables.a);
        assert_eq!(a.trace, b.trace);
        assert!(a.frames.iter().flatten().all(|&v| v == 0.0 || v == 1.0));
        assert!(a.trace.iter().all(|t| t.loss.is_finite()));
    }

    #[test]
    fn single_frame_disk_converges() {
        let n = 64;
        let cfg = cfg();
        let disk = Array2::from_shape_fn((n, n), |(r, c)| {
            let (y, x) = (r as f64 - 31.5, c as f64 - 31.5);
            if x * x + y * y <= 24.0f64.powi(2) {
                1.0
            } else {
                0.0
            }
        });
        let wrp = PlaneDepth::from_diopters(&cfg, cfg.wrp_diopters());
        let sup = Supervision::FocalStack { amplitudes: vec![disk], planes: vec![wrp] };
        let m = LossModel::new((n, n), Pitch::square(P), L, false, &sup).unwrap();
        let opt = OptimizerConfig { iterations: 300, seed: 1, ..Default::default() };
        let out = optimize_channel(&m, 1, &opt, 0, None).unwrap();
        assert!(out.final_loss < 0.25 * out.initial_loss, "{} vs {}", out.final_loss, out.initial_loss);
        let min = out.trace.iter().map(|t| t.loss).fold(f64::INFINITY, f64::min);
        assert!(min <= out.trace[0].loss);
    }

    #[test]
    fn complex_fields_take_real_part_gradient() {
        // evaluate_fields on a real-valued complex stack equals evaluate.
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let m = model(&sup_2p5d((8, 8), 19), (8, 8));
        let q = vec![rand_grid((8, 8), &mut rng)];
        let c: Vec<Array2<Complex64>> = q.iter().map(|g| g.mapv(|v| Complex64::new(v, 0.0))).collect();
        let a = m.evaluate(&q, None).unwrap();
        let b = m.evaluate_fields(&c, None).unwrap();
        assert_eq!(a.loss, b.loss);
        assert_eq!(a.grad, b.grad);
    }
}

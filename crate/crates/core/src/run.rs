//! From a run configuration to supervision targets and saved results.

use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::io::config::{Mode, RunConfig, Scene};
use crate::io::hologram::{write_hologram, BinaryHologram};
use crate::io::pfm::{write_pfm, FloatImage};
use crate::optics::{plane_depths, OpticalConfig};
use crate::optimizer::{
    optimize, supervision_2p5d, supervision_3d, supervision_4d, OptimizeResult, Supervision,
};
use crate::targets::assets::{load_lightfield, load_rgbd};
use crate::targets::focal_stack::{focal_stack_from_lf, focal_stack_from_rgbd};
use crate::targets::lightfield::{LightField, StftParams, StftPlan};
use crate::targets::synthetic::{desk_scene, render_light_field};
use crate::targets::RgbdTarget;
use crate::wave::{propagate_asm, FieldStack};

pub fn stft_params(run: &RunConfig) -> StftParams {
    let s = &run.supervision;
    StftParams { window: s.stft_window, hop: s.hop(), n_views: (s.views[0], s.views[1]), sideband: run.optics.sideband }
}

enum Loaded {
    Rgbd(RgbdTarget),
    Lf(Vec<LightField>),
}

fn load_scene(run: &RunConfig) -> Result<Loaded> {
    let cfg = &run.optics;
    let (rows, cols) = cfg.active_resolution.shape();
    let loaded = match &run.supervision.scene {
        Scene::Synthetic => Loaded::Rgbd(desk_scene(cfg, rows, cols)?),
        Scene::Rgbd { image, depth, depth_range } => {
            Loaded::Rgbd(load_rgbd(image, depth, (depth_range[0], depth_range[1]), cfg)?)
        }
        Scene::Lightfield { dir } => Loaded::Lf(load_lightfield(dir)?.into_light_fields(cfg)?),
    };
    let dim = match &loaded {
        Loaded::Rgbd(t) => t.dim(),
        Loaded::Lf(l) => l[0].dim(),
    };
    if dim != (rows, cols) {
        return Err(Error::ShapeMismatch(format!("scene is {dim:?}, active resolution is {:?}", (rows, cols))));
    }
    Ok(loaded)
}

/// Light field of an RGB-D target rendered at the STFT carrier angles of
/// one channel.
pub fn render_for_stft(target: &RgbdTarget, channel: usize, cfg: &OpticalConfig, params: StftParams, num_planes: usize) -> Result<LightField> {
    let plan = StftPlan::new(target.dim(), params)?;
    let (ax, ay) = plan.carrier_angles(cfg.pixel_pitch, cfg.pixel_pitch, cfg.wavelength(channel)?);
    let planes = plane_depths(cfg, num_planes)?;
    render_light_field(target, channel, &planes, ax, ay, cfg.pixel_pitch)
}

/// One supervision target per channel.
pub fn build_supervision(run: &RunConfig) -> Result<Vec<Supervision>> {
    run.validate()?;
    let cfg = &run.optics;
    let sup = &run.supervision;
    let planes = plane_depths(cfg, sup.num_planes)?;
    let nch = cfg.num_channels();
    let params = stft_params(run);
    match (load_scene(run)?, sup.mode) {
        (Loaded::Rgbd(t), Mode::TwoPointFiveD) => (0..nch).map(|c| supervision_2p5d(&t, c, &planes)).collect(),
        (Loaded::Lf(_), Mode::TwoPointFiveD) => {
            Err(Error::InvalidConfig("2.5d supervision needs an RGB-D or synthetic scene".into()))
        }
        (Loaded::Rgbd(t), Mode::ThreeD) => focal_stack_from_rgbd(&t, &planes, sup.pupil_diameter, cfg)?
            .iter()
            .map(|fs| supervision_3d(fs, &planes))
            .collect(),
        (Loaded::Lf(lfs), Mode::ThreeD) => {
            lfs.iter().map(|lf| supervision_3d(&focal_stack_from_lf(lf, &planes, cfg), &planes)).collect()
        }
        (Loaded::Rgbd(t), Mode::FourD) => (0..nch)
            .map(|c| supervision_4d(&render_for_stft(&t, c, cfg, params, sup.num_planes)?, params, cfg.wrp_distance))
            .collect(),
        (Loaded::Lf(lfs), Mode::FourD) => {
            lfs.iter().map(|lf| supervision_4d(lf, params, cfg.wrp_distance)).collect()
        }
    }
}

/// Optimize every channel of a run. `seed` overrides the configured seed.
pub fn run_optimization(run: &RunConfig, seed: Option<u64>) -> Result<Vec<OptimizeResult>> {
    let sup = build_supervision(run)?;
    let mut opt = run.optimizer.clone();
    if let Some(s) = seed {
        opt.seed = s;
    }
    optimize(&run.optics, &sup, &opt)
}

/// Time-averaged intensity at the WRP for each channel.
pub fn wrp_reconstruction(cfg: &OpticalConfig, holo: &BinaryHologram) -> Result<Vec<Array2<f64>>> {
    holo.frames
        .iter()
        .enumerate()
        .map(|(c, frames)| {
            let stack = FieldStack::from_patterns(frames, cfg.pixel_pitch, cfg.wavelength(c)?)?;
            let n = stack.len() as f64;
            let sum = stack
                .frames()
                .iter()
                .map(|f| propagate_asm(f, cfg.wrp_distance, cfg.sideband).intensity())
                .fold(Array2::<f64>::zeros(stack.dim()), |a, b| a + b);
            Ok(sum / n)
        })
        .collect()
}

/// Files written by [`save_results`].
#[derive(Clone, Debug)]
pub struct SavedRun {
    pub hologram: PathBuf,
    pub trace: PathBuf,
    pub reconstruction: PathBuf,
}

/// Write the hologram, the loss trace and the WRP reconstruction.
pub fn save_results(dir: &Path, cfg: &OpticalConfig, results: &[OptimizeResult]) -> Result<SavedRun> {
    std::fs::create_dir_all(dir)?;
    let holo = BinaryHologram::new(results.iter().map(|r| r.frames.clone()).collect())?;
    let hologram = dir.join("hologram.hbin");
    write_hologram(&hologram, &holo)?;

    let trace = dir.join("trace.csv");
    let mut text = String::from("channel,iteration,loss,scale\n");
    for (c, r) in results.iter().enumerate() {
        for e in &r.trace {
            text.push_str(&format!("{c},{},{:e},{:e}\n", e.iteration, e.loss, e.scale));
        }
    }
    std::fs::write(&trace, text)?;

    let recon = wrp_reconstruction(cfg, &holo)?;
    let reconstruction = dir.join("wrp.pfm");
    write_pfm(&reconstruction, &FloatImage::new(recon)?)?;
    Ok(SavedRun { hologram, trace, reconstruction })
}

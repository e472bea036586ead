use std::path::PathBuf;

use anyhow::{Context as _, Result};
use holocgh_core::analysis::luminance::{luminance, LuminanceInput, PhotopicTable};
use holocgh_core::analysis::parallax::{parallax_detection_rate, ParallaxModel};
use holocgh_core::analysis::sampling::{
    bandwidth_from_cpd, max_depth_range, required_views, DepthRange, Resolution,
};
use holocgh_core::optics::{display_geometry, max_cpd};

use crate::common::{optics_or_default, read_gray, usage, Context};

#[derive(clap::Subcommand, Debug)]
pub enum Command {
    /// Eyebox, field of view, angular resolution and depth volume.
    Geometry(GeometryArgs),
    /// Horizontal views needed for a resolution over a depth range.
    Sampling(SamplingArgs),
    /// Ocular-parallax detection rate between two image sets.
    Parallax(ParallaxArgs),
    /// Luminance of a set of laser lines.
    Luminance(LuminanceArgs),
}

#[derive(clap::Args, Debug)]
pub struct GeometryArgs {
    /// Optics (TOML); defaults to the prototype hardware.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct SamplingArgs {
    /// Target resolution (cycles/deg).
    #[arg(long)]
    cpd: f64,
    /// Depth range (diopters).
    #[arg(long)]
    depth_range: f64,
    #[arg(long, default_value_t = 532.0)]
    wavelength_nm: f64,
    /// Eyepiece focal length (mm); defaults to the config's.
    #[arg(long)]
    focal_length_mm: Option<f64>,
    /// Optics (TOML), used for the focal length and the cutoff frequency.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write a views-vs-depth-range sweep to this CSV.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct ParallaxArgs {
    /// Reference images (PFM), one per focal state.
    #[arg(long, value_delimiter = ',', required = true)]
    reference: Vec<PathBuf>,
    /// Test images (PFM), same focal states and order.
    #[arg(long, value_delimiter = ',', required = true)]
    test: Vec<PathBuf>,
    /// Optics (TOML) for the pixel-to-degree scale.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct LuminanceArgs {
    /// Laser line as WAVELENGTH_NM:POWER_W; repeat per line.
    #[arg(long = "line", required = true, value_parser = parse_line)]
    lines: Vec<(f64, f64)>,
    /// Emitting area (m^2); defaults to the active SLM area.
    #[arg(long)]
    area: Option<f64>,
    /// Solid angle (sr); defaults to the eyebox seen from the eyepiece focus.
    #[arg(long)]
    solid_angle: Option<f64>,
    /// Photopic table CSV (wavelength_nm,value) replacing the built-in one.
    #[arg(long)]
    photopic: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_line(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected NM:W, got {s:?}"))?;
    let nm: f64 = a.trim().parse().map_err(|e| format!("wavelength: {e}"))?;
    let w: f64 = b.trim().parse().map_err(|e| format!("power: {e}"))?;
    Ok((nm * 1e-9, w))
}

pub fn run(ctx: &Context, cmd: Command) -> Result<()> {
    match cmd {
        Command::Geometry(a) => geometry(ctx, a),
        Command::Sampling(a) => sampling(ctx, a),
        Command::Parallax(a) => parallax(ctx, a),
        Command::Luminance(a) => luminance_cmd(ctx, a),
    }
}

/// Writes a manifest only when an output directory was asked for.
fn manifest_if_requested(ctx: &Context, outputs: Vec<PathBuf>) -> Result<()> {
    let explicit = ctx.out.is_some() || std::env::var_os(crate::common::OUT_DIR_ENV).is_some_and(|v| !v.is_empty());
    if explicit {
        let out = ctx.out_dir(None);
        std::fs::create_dir_all(&out)?;
        let mut m = ctx.manifest();
        m.seed = ctx.seed;
        m.outputs = outputs;
        m.write(&out)?;
    }
    Ok(())
}

fn geometry(ctx: &Context, a: GeometryArgs) -> Result<()> {
    let cfg = optics_or_default(a.config.as_deref())?;
    let g = display_geometry(&cfg)?;
    println!("eyebox: {:.3} x {:.3} mm", g.eyebox.0 * 1e3, g.eyebox.1 * 1e3);
    println!("field of view: {:.2} x {:.2} deg", g.fov_deg.0, g.fov_deg.1);
    println!("max resolution: {:.2} cpd", g.max_cpd);
    println!("NCP: {:.3} D (FCP at 0 D)", g.d_ncp);
    for (c, (t, e)) in g.theta_diff.iter().zip(&g.eyebox_per_channel).enumerate() {
        println!(
            "channel {c} ({:.0} nm): diffraction {:.3} deg, eyebox {:.3} x {:.3} mm",
            cfg.wavelengths[c] * 1e9,
            t.to_degrees(),
            e.0 * 1e3,
            e.1 * 1e3
        );
    }
    manifest_if_requested(ctx, vec![])
}

fn sampling(ctx: &Context, a: SamplingArgs) -> Result<()> {
    let cfg = optics_or_default(a.config.as_deref())?;
    let f = a.focal_length_mm.map(|mm| mm * 1e-3).unwrap_or(cfg.eyepiece_focal_length);
    let lambda = a.wavelength_nm * 1e-9;
    let cutoff = max_cpd(f, cfg.pixel_pitch);
    let req = required_views(Resolution::CyclesPerDegree(a.cpd), a.depth_range, f, lambda, Some(cutoff))
        .map_err(|e| usage(e.to_string()))?;
    println!("{} horizontal views (raw {:.3})", req.views, req.raw);
    println!("bandwidth {:.4e} cycles/m, half depth {:.4} mm", req.bandwidth, req.half_depth * 1e3);
    let mut outputs = Vec::new();
    if let Some(path) = a.table {
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(["cpd", "focal_length_mm", "depth_range_d", "views", "raw", "max_depth_range_d"])?;
        for cpd in [10.0, 20.0, 30.0, 40.0] {
            let b = bandwidth_from_cpd(cpd, f);
            for step in 0..=20 {
                let d = step as f64 * 0.5;
                let r = required_views(Resolution::Bandwidth(b), d, f, lambda, None)?;
                let back = match max_depth_range(r.views as f64, b, f, lambda)? {
                    DepthRange::Bounded(x) => format!("{x:.6}"),
                    DepthRange::Unbounded => "inf".into(),
                };
                w.write_record([
                    cpd.to_string(),
                    format!("{}", f * 1e3),
                    d.to_string(),
                    r.views.to_string(),
                    format!("{:.6}", r.raw),
                    back,
                ])?;
            }
        }
        w.flush()?;
        println!("wrote {}", path.display());
        outputs.push(path);
    }
    manifest_if_requested(ctx, outputs)
}

fn parallax(ctx: &Context, a: ParallaxArgs) -> Result<()> {
    if a.reference.len() != a.test.len() {
        return Err(usage(format!(
            "--reference has {} image(s) but --test has {}",
            a.reference.len(),
            a.test.len()
        )));
    }
    let cfg = optics_or_default(a.config.as_deref())?;
    let model = ParallaxModel::for_display(cfg.pixel_pitch, cfg.eyepiece_focal_length);
    let r = a.reference.iter().map(|p| read_gray(p)).collect::<Result<Vec<_>>>()?;
    let t = a.test.iter().map(|p| read_gray(p)).collect::<Result<Vec<_>>>()?;
    let rate = parallax_detection_rate(&r, &t, &model)?;
    for (j, (m, d)) in rate.per_state.iter().enumerate() {
        println!("state {j}: {d}/{m} matches above threshold");
    }
    println!("detection rate: {:.4} ({}/{})", rate.rate, rate.detected, rate.matched);
    manifest_if_requested(ctx, vec![])
}

fn luminance_cmd(ctx: &Context, a: LuminanceArgs) -> Result<()> {
    let cfg = optics_or_default(a.config.as_deref())?;
    let table = match &a.photopic {
        Some(p) => PhotopicTable::from_csv(p).with_context(|| format!("reading {}", p.display()))?,
        None => PhotopicTable::default(),
    };
    let area = a.area.unwrap_or_else(|| {
        let (rows, cols) = cfg.active_resolution.shape();
        rows as f64 * cols as f64 * cfg.pixel_pitch * cfg.pixel_pitch
    });
    let solid_angle = match a.solid_angle {
        Some(s) => s,
        None => {
            let e = display_geometry(&cfg)?.eyebox;
            e.0 * e.1 / (cfg.eyepiece_focal_length * cfg.eyepiece_focal_length)
        }
    };
    let input = LuminanceInput { lines: a.lines, area, solid_angle };
    let nits = luminance(&input, &table).map_err(|e| usage(e.to_string()))?;
    println!("area {area:.4e} m^2, solid angle {solid_angle:.4e} sr");
    println!("luminance: {nits:.4} cd/m^2");
    manifest_if_requested(ctx, vec![])
}

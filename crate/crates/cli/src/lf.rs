use std::path::PathBuf;

use anyhow::{Context as _, Result};
use holocgh_core::io::hologram::read_hologram;
use holocgh_core::io::pfm::{write_pfm, FloatImage};
use holocgh_core::targets::lightfield::{StftParams, StftPlan};
use holocgh_core::viewer::{eyebox_energy_tiles, tile_uniformity};
use holocgh_core::wave::{FieldStack, Propagator};
use ndarray::Array2;

use crate::common::{optics_for_hologram, usage, Context};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Hologram file (HBIN1).
    hologram: PathBuf,
    /// Optics (TOML); defaults to the prototype hardware.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Views as U,V.
    #[arg(long, default_value = "3,3", value_parser = parse_pair)]
    views: (usize, usize),
    #[arg(long, default_value_t = 16)]
    window: usize,
    /// Defaults to the window size.
    #[arg(long)]
    hop: Option<usize>,
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected U,V, got {s:?}"))?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

pub fn run(ctx: &Context, args: Args) -> Result<()> {
    let holo = read_hologram(&args.hologram).with_context(|| format!("reading {}", args.hologram.display()))?;
    let cfg = optics_for_hologram(args.config.as_deref(), &holo)?;
    let params = StftParams {
        window: args.window,
        hop: args.hop.unwrap_or(args.window),
        n_views: args.views,
        sideband: cfg.sideband,
    };
    let shape = (holo.height, holo.width);
    let plan = StftPlan::new(shape, params).map_err(|e| usage(e.to_string()))?;
    let (nu, nv) = params.n_views;

    // views[c][view] averaged over frames
    let mut per_channel: Vec<Vec<Array2<f64>>> = Vec::new();
    let mut tiles = Vec::new();
    for (c, frames) in holo.frames.iter().enumerate() {
        let lambda = cfg.wavelength(c)?;
        let stack = FieldStack::from_patterns(frames, cfg.pixel_pitch, lambda)?;
        let prop = Propagator::new(shape, stack.pitch(), lambda, true);
        let kernel = prop.kernel(cfg.wrp_distance, cfg.sideband);
        let mut acc: Option<Vec<Array2<f64>>> = None;
        for f in stack.frames() {
            let views = plan.view_intensities(&plan.analyze(&prop.propagate(&f.grid, &kernel))?);
            acc = Some(match acc {
                None => views,
                Some(a) => a.into_iter().zip(views).map(|(x, y)| x + y).collect(),
            });
        }
        let n = stack.len() as f64;
        per_channel.push(acc.unwrap_or_default().into_iter().map(|v| v / n).collect());
        tiles.push(eyebox_energy_tiles(&stack, &cfg, params)?);
    }

    let out = ctx.out_dir(None);
    std::fs::create_dir_all(&out)?;
    let mut outputs = Vec::new();
    for j in 0..nv {
        for i in 0..nu {
            let img = FloatImage::new(per_channel.iter().map(|v| v[j * nu + i].clone()).collect())?;
            let path = out.join(format!("view_{j:02}_{i:02}.pfm"));
            write_pfm(&path, &img)?;
            outputs.push(path);
        }
    }
    let tiles_path = out.join("tiles.csv");
    let mut w = csv::Writer::from_path(&tiles_path)?;
    w.write_record(["channel", "view_row", "view_col", "energy"])?;
    for (c, t) in tiles.iter().enumerate() {
        for ((j, i), v) in t.indexed_iter() {
            w.write_record([c.to_string(), j.to_string(), i.to_string(), format!("{v:.6}")])?;
        }
        println!("channel {c}: tile min/max {:.3}", tile_uniformity(t));
    }
    w.flush()?;
    outputs.push(tiles_path);
    let mut m = ctx.manifest();
    m.seed = ctx.seed;
    m.outputs = outputs;
    m.write(&out)?;
    println!("wrote {nu}x{nv} views to {}", out.display());
    Ok(())
}

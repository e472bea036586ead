use std::path::PathBuf;

use anyhow::{Context as _, Result};
use holocgh_core::io::hologram::read_hologram;
use holocgh_core::io::pfm::{write_pfm, FloatImage};
use holocgh_core::io::png::write_png8;
use holocgh_core::viewer::{retinal_image, PupilState};
use holocgh_core::wave::FieldStack;
use serde::Deserialize;

use crate::common::{optics_for_hologram, Context};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Hologram file (HBIN1).
    hologram: PathBuf,
    /// CSV with columns x_p,y_p,d_p,focal_diopters (pupil coordinates
    /// normalized by the eyebox width).
    #[arg(long)]
    pupil_csv: PathBuf,
    /// Optics (TOML); defaults to the prototype hardware.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stiles-Crawford coefficient (m^-2); omit for a diffraction-limited
    /// pupil.
    #[arg(long)]
    sce: Option<f64>,
}

#[derive(Deserialize, Debug)]
struct Row {
    x_p: f64,
    y_p: f64,
    d_p: f64,
    focal_diopters: f64,
}

pub fn run(ctx: &Context, args: Args) -> Result<()> {
    let holo = read_hologram(&args.hologram).with_context(|| format!("reading {}", args.hologram.display()))?;
    let cfg = optics_for_hologram(args.config.as_deref(), &holo)?;
    let mut reader = csv::Reader::from_path(&args.pupil_csv)
        .with_context(|| format!("opening {}", args.pupil_csv.display()))?;
    let rows: Vec<Row> = reader.deserialize().collect::<std::result::Result<_, _>>().context("parsing pupil CSV")?;
    let stacks = holo
        .frames
        .iter()
        .enumerate()
        .map(|(c, f)| Ok(FieldStack::from_patterns(f, cfg.pixel_pitch, cfg.wavelength(c)?)?))
        .collect::<Result<Vec<_>>>()?;

    let out = ctx.out_dir(None);
    std::fs::create_dir_all(&out)?;
    let mut index = csv::Writer::from_path(out.join("index.csv"))?;
    index.write_record(["row", "x_p", "y_p", "d_p", "focal_diopters", "vignetted", "file"])?;
    let mut outputs = Vec::new();
    for (k, r) in rows.iter().enumerate() {
        let mut state = PupilState::new((r.x_p, r.y_p), r.d_p, r.focal_diopters)
            .with_context(|| format!("pupil CSV row {}", k + 1))?;
        if let Some(p) = args.sce {
            state = state.with_sce(p)?;
        }
        let images = stacks.iter().map(|s| retinal_image(s, &cfg, &state)).collect::<holocgh_core::Result<Vec<_>>>()?;
        let vignetted = images.iter().all(|i| i.vignetted);
        let img = FloatImage::new(images.into_iter().map(|i| i.intensity).collect())?;
        let name = format!("retina_{k:03}.pfm");
        write_pfm(out.join(&name), &img)?;
        let white = img.channels.iter().flat_map(|c| c.iter()).cloned().fold(0.0, f64::max);
        if matches!(img.channels.len(), 1 | 3) {
            write_png8(out.join(format!("retina_{k:03}.png")), &img, white)?;
        }
        index.write_record([
            k.to_string(),
            r.x_p.to_string(),
            r.y_p.to_string(),
            r.d_p.to_string(),
            r.focal_diopters.to_string(),
            vignetted.to_string(),
            name.clone(),
        ])?;
        outputs.push(out.join(name));
    }
    index.flush()?;
    let mut m = ctx.manifest();
    m.seed = ctx.seed;
    m.outputs = outputs;
    m.write(&out)?;
    println!("wrote {} retinal images to {}", rows.len(), out.display());
    Ok(())
}

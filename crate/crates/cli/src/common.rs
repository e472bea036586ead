use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use holocgh_core::io::config::{load_optics, Manifest};
use holocgh_core::io::hologram::BinaryHologram;
use holocgh_core::io::pfm::read_pfm;
use holocgh_core::optics::{OpticalConfig, Resolution};
use ndarray::Array2;

pub const OUT_DIR_ENV: &str = "HOLOCGH_OUT_DIR";

/// Bad invocation rather than bad data; maps to exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub struct Context {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub argv: Vec<String>,
}

impl Context {
    /// `--out`, then the environment, then `fallback`, then `./holocgh-out`.
    pub fn out_dir(&self, fallback: Option<&Path>) -> PathBuf {
        if let Some(o) = &self.out {
            return o.clone();
        }
        if let Some(e) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(e);
        }
        fallback.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("holocgh-out"))
    }

    pub fn manifest(&self) -> Manifest {
        Manifest::new(self.argv.clone())
    }
}

/// Optics from `--config`, or the prototype hardware.
pub fn optics_or_default(config: Option<&Path>) -> Result<OpticalConfig> {
    match config {
        Some(p) => load_optics(p).with_context(|| format!("reading optics from {}", p.display())),
        None => Ok(OpticalConfig::prototype()),
    }
}

/// Optics for a hologram: the active area is set to the hologram size and
/// the channel count must match.
pub fn optics_for_hologram(config: Option<&Path>, holo: &BinaryHologram) -> Result<OpticalConfig> {
    let mut cfg = optics_or_default(config)?;
    if cfg.num_channels() != holo.channels() {
        return Err(usage(format!(
            "hologram has {} channel(s) but the optics list {} wavelength(s); pass a matching --config",
            holo.channels(),
            cfg.num_channels()
        )));
    }
    cfg.active_resolution = Resolution::new(holo.width, holo.height);
    if cfg.slm_resolution.cols < holo.width || cfg.slm_resolution.rows < holo.height {
        cfg.slm_resolution = cfg.active_resolution;
    }
    cfg.num_frames = holo.num_frames();
    cfg.validate()?;
    Ok(cfg)
}

/// Grayscale image from a PFM: the channel mean.
pub fn read_gray(path: &Path) -> Result<Array2<f64>> {
    let img = read_pfm(path).with_context(|| format!("reading {}", path.display()))?;
    let n = img.channels.len() as f64;
    let sum = img.channels.iter().fold(Array2::<f64>::zeros(img.dim()), |a, c| a + c);
    Ok(sum / n)
}

//! TOML run configuration and run manifests.
//!
//! ```toml
//! [optics]
//! wavelengths = [5.2e-7]
//! pixel_pitch = 8.2e-6
//! slm_resolution = { cols = 192, rows = 120 }
//! active_resolution = { cols = 192, rows = 120 }
//! eyepiece_focal_length = 0.04
//! half_depth = 0.005535
//! wrp_distance = 0.01
//! num_frames = 8
//! sideband = true
//!
//! [supervision]
//! mode = "4d"
//! num_planes = 9
//! views = [3, 3]
//! scene = { kind = "synthetic" }
//!
//! [optimizer]
//! iterations = 1000
//! seed = 7
//!
//! [output]
//! dir = "runs/desk"
//! ```
//!
//! Relative asset paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::OpticalConfig;
use crate::optimizer::OptimizerConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "2.5d")]
    TwoPointFiveD,
    #[serde(rename = "3d")]
    ThreeD,
    #[serde(rename = "4d")]
    FourD,
}

/// Where the supervision comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Scene {
    /// Built-in procedural desk scene at the active resolution.
    Synthetic,
    /// Image plus depth map; depth codes in [0, 1] map onto
    /// `depth_range` diopters.
    Rgbd { image: PathBuf, depth: PathBuf, depth_range: [f64; 2] },
    /// Directory of `view_RR_CC` files.
    Lightfield { dir: PathBuf },
}

fn default_planes() -> usize {
    9
}

fn default_views() -> [usize; 2] {
    [3, 3]
}

fn default_window() -> usize {
    16
}

fn default_pupil() -> f64 {
    4e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupervisionConfig {
    pub mode: Mode,
    pub scene: Scene,
    #[serde(default = "default_planes")]
    pub num_planes: usize,
    /// STFT views `[U, V]` for 4D supervision.
    #[serde(default = "default_views")]
    pub views: [usize; 2],
    #[serde(default = "default_window")]
    pub stft_window: usize,
    /// Defaults to the window (non-overlapping patches).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stft_hop: Option<usize>,
    /// Pupil diameter (m) for RGB-D focal-stack synthesis in 3D mode.
    #[serde(default = "default_pupil")]
    pub pupil_diameter: f64,
}

impl SupervisionConfig {
    pub fn hop(&self) -> usize {
        self.stft_hop.unwrap_or(self.stft_window)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub optics: OpticalConfig,
    pub supervision: SupervisionConfig,
    pub optimizer: OptimizerConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parse and validate without touching the file system.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    /// Read a config file, resolve relative asset paths against its
    /// directory and check that every referenced file exists.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve_paths(base);
        cfg.check_files()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.supervision.scene {
            Scene::Synthetic => {}
            Scene::Rgbd { image, depth, .. } => {
                fix(image);
                fix(depth);
            }
            Scene::Lightfield { dir } => fix(dir),
        }
    }

    pub fn check_files(&self) -> Result<()> {
        let need = |p: &Path| {
            if p.exists() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("referenced path {} does not exist", p.display())))
            }
        };
        match &self.supervision.scene {
            Scene::Synthetic => Ok(()),
            Scene::Rgbd { image, depth, .. } => need(image).and_then(|_| need(depth)),
            Scene::Lightfield { dir } => need(dir),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.optics.validate()?;
        self.optimizer.validate()?;
        let s = &self.supervision;
        if s.num_planes == 0 {
            return Err(Error::InvalidConfig("num_planes must be at least 1".into()));
        }
        if s.views[0] == 0 || s.views[1] == 0 {
            return Err(Error::InvalidConfig("views must be positive".into()));
        }
        if s.stft_window == 0 || s.hop() == 0 || s.hop() > s.stft_window {
            return Err(Error::InvalidConfig("STFT needs 0 < hop <= window".into()));
        }
        if !(s.pupil_diameter > 0.0) {
            return Err(Error::InvalidConfig("pupil_diameter must be positive".into()));
        }
        match (&s.scene, s.mode) {
            (Scene::Rgbd { depth_range: [lo, hi], .. }, _) if !(lo <= hi) => {
                Err(Error::InvalidConfig("depth_range must be [min, max]".into()))
            }
            (Scene::Lightfield { .. }, Mode::TwoPointFiveD) => {
                Err(Error::InvalidConfig("2.5d supervision needs an RGB-D or synthetic scene".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Read only the optical configuration from a file: either the `[optics]`
/// table of a run config or a file holding just the optics keys.
pub fn load_optics(path: impl AsRef<Path>) -> Result<OpticalConfig> {
    let text = std::fs::read_to_string(path)?;
    let value: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
    let table = match value.get("optics") {
        Some(toml::Value::Table(t)) => t.clone(),
        _ => value,
    };
    let cfg: OpticalConfig =
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Everything needed to repeat a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub seed: Option<u64>,
    pub config: Option<RunConfig>,
    #[serde(default)]
    pub outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            tool: "holocgh".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            seed: None,
            config: None,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.toml");
        let text = toml::to_string_pretty(self).map_err(|e| Error::ConfigParse(e.to_string()))?;
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        toml::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::ConfigParse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = r#"
[optics]
wavelengths = [5.2e-7]
pixel_pitch = 8.2e-6
slm_resolution = { cols = 192, rows = 120 }
active_resolution = { cols = 192, rows = 120 }
eyepiece_focal_length = 0.04
half_depth = 0.005535
wrp_distance = 0.01
num_frames = 8
sideband = true

[supervision]
mode = "4d"
scene = { kind = "synthetic" }

[optimizer]
iterations = 50
seed = 3

[output]
dir = "out"
"#;

    #[test]
    fn parse_serialize_parse_is_a_fixed_point() {
        let a = RunConfig::from_toml_str(SAMPLE).unwrap();
        let text = a.to_toml_string().unwrap();
        let b = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.to_toml_string().unwrap(), text);
        assert_eq!(a.supervision.views, [3, 3]);
        assert_eq!(a.supervision.hop(), 16);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(RunConfig::from_toml_str(&SAMPLE.replace("seed = 3", "seed = 3\nbogus = 1")).is_err());
        assert!(RunConfig::from_toml_str(&SAMPLE.replace("iterations = 50", "iterations = 0")).is_err());
        assert!(RunConfig::from_toml_str(&SAMPLE.replace("\"4d\"", "\"5d\"")).is_err());
    }

    #[test]
    fn missing_assets_fail_at_load() {
        let dir = std::env::temp_dir().join(format!("holocgh-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let text = SAMPLE.replace(
            "scene = { kind = \"synthetic\" }",
            "scene = { kind = \"lightfield\", dir = \"no_such_dir\" }",
        );
        let path = dir.join("run.toml");
        std::fs::write(&path, text).unwrap();
        let err = RunConfig::load(&path).unwrap_err();
        assert!(err.to_string().contains("no_such_dir"));
        std::fs::create_dir_all(dir.join("no_such_dir")).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert!(matches!(cfg.supervision.scene, Scene::Lightfield { ref dir } if dir.is_absolute() || dir.starts_with(std::env::temp_dir())));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}

//! Photometric luminance of a set of laser lines.

use std::path::Path;

use crate::error::{Error, Result};

/// Peak luminous efficacy (lm/W).
pub const PEAK_EFFICACY: f64 = 683.0;

/// CIE 1924 photopic luminosity function, 380-780 nm at 5 nm.
const CIE_1924: [f64; 81] = [
    0.000039, 0.000064, 0.00012, 0.000217, 0.000396, 0.00064, 0.00121, 0.00218, 0.004, 0.0073, 0.0116,
    0.01684, 0.023, 0.0298, 0.038, 0.048, 0.06, 0.0739, 0.09098, 0.1126, 0.13902, 0.1693, 0.20802, 0.2586,
    0.323, 0.4073, 0.503, 0.6082, 0.71, 0.7932, 0.862, 0.91485, 0.954, 0.9803, 0.99495, 1.0, 0.995, 0.9786,
    0.952, 0.9154, 0.87, 0.8163, 0.757, 0.6949, 0.631, 0.5668, 0.503, 0.4412, 0.381, 0.321, 0.265, 0.217,
    0.175, 0.1382, 0.107, 0.0816, 0.061, 0.04458, 0.032, 0.0232, 0.017, 0.01192, 0.00821, 0.005723,
    0.004102, 0.002929, 0.002091, 0.001484, 0.001047, 0.00074, 0.00052, 0.000361, 0.000249, 0.000172,
    0.00012, 0.0000848, 0.00006, 0.0000424, 0.00003, 0.0000212, 0.000015,
];

/// Tabulated `V(lambda)` with linear interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotopicTable {
    /// Wavelengths (m), strictly increasing.
    pub wavelengths: Vec<f64>,
    pub values: Vec<f64>,
}

impl Default for PhotopicTable {
    fn default() -> Self {
        Self {
            wavelengths: (0..CIE_1924.len()).map(|i| (380.0 + 5.0 * i as f64) * 1e-9).collect(),
            values: CIE_1924.to_vec(),
        }
    }
}

impl PhotopicTable {
    pub fn new(wavelengths: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if wavelengths.len() != values.len() || wavelengths.len() < 2 {
            return Err(Error::InvalidArgument("photopic table needs >= 2 matching samples".into()));
        }
        if wavelengths.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("photopic wavelengths must increase".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("photopic values must lie in [0, 1]".into()));
        }
        Ok(Self { wavelengths, values })
    }

    /// Two-column CSV `wavelength_nm,value`; lines starting with `#` and a
    /// non-numeric header are skipped.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let (mut w, mut v) = (Vec::new(), Vec::new());
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (a, b) = (parts.next(), parts.next());
            match (a.and_then(|s| s.parse::<f64>().ok()), b.and_then(|s| s.parse::<f64>().ok())) {
                (Some(nm), Some(val)) => {
                    w.push(nm * 1e-9);
                    v.push(val);
                }
                _ if i == 0 => continue,
                _ => {
                    return Err(Error::Malformed { format: "photopic CSV", reason: format!("line {}: {line}", i + 1) })
                }
            }
        }
        Self::new(w, v)
    }

    /// `V(lambda)`; 0 with a warning outside the table.
    pub fn value(&self, wavelength: f64) -> f64 {
        let w = &self.wavelengths;
        if wavelength < w[0] || wavelength > w[w.len() - 1] {
            log::warn!("wavelength {:.1} nm lies outside the photopic table; using V = 0", wavelength * 1e9);
            return 0.0;
        }
        let i = w.partition_point(|&x| x <= wavelength).min(w.len() - 1).max(1);
        let t = (wavelength - w[i - 1]) / (w[i] - w[i - 1]);
        self.values[i - 1] + t * (self.values[i] - self.values[i - 1])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LuminanceInput {
    /// `(wavelength m, optical power W)` per line.
    pub lines: Vec<(f64, f64)>,
    /// Display area (m^2).
    pub area: f64,
    /// Solid angle (sr).
    pub solid_angle: f64,
}

/// `683 / (S Omega) sum Phi(lambda_i) V(lambda_i)` in cd/m^2.
pub fn luminance(input: &LuminanceInput, table: &PhotopicTable) -> Result<f64> {
    if !(input.area > 0.0 && input.solid_angle > 0.0) {
        return Err(Error::InvalidArgument("area and solid angle must be positive".into()));
    }
    if input.lines.iter().any(|&(_, p)| !(p >= 0.0)) {
        return Err(Error::InvalidArgument("optical powers must be >= 0".into()));
    }
    let flux: f64 = input.lines.iter().map(|&(l, p)| p * table.value(l)).sum();
    Ok(PEAK_EFFICACY * flux / (input.area * input.solid_angle))
}

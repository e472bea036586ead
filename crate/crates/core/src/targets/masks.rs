use ndarray::Array2;

use crate::error::{Error, Result};

/// Binary masks assigning each pixel to its nearest depth plane.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskSet {
    pub masks: Vec<Array2<f64>>,
    /// Plane depths in diopters, ascending.
    pub planes: Vec<f64>,
}

impl MaskSet {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.masks[0].dim()
    }

    /// Index of the plane owning each pixel.
    pub fn labels(&self) -> Array2<usize> {
        let mut out = Array2::zeros(self.dim());
        for (k, m) in self.masks.iter().enumerate() {
            out.zip_mut_with(m, |l, &v| {
                if v == 1.0 {
                    *l = k
                }
            });
        }
        out
    }
}

/// Nearest-plane masks in diopter distance. Ties go to the smaller index.
pub fn closest_distance_masks(depth: &Array2<f64>, planes: &[f64]) -> Result<MaskSet> {
    if planes.is_empty() {
        return Err(Error::InvalidArgument("need at least one plane".into()));
    }
    if planes.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("planes must be sorted ascending".into()));
    }
    let mut masks = vec![Array2::zeros(depth.dim()); planes.len()];
    for (idx, &d) in depth.indexed_iter() {
        let mut best = 0;
        let mut best_dist = (d - planes[0]).abs();
        for (k, &p) in planes.iter().enumerate().skip(1) {
            let dist = (d - p).abs();
            if dist < best_dist {
                best = k;
                best_dist = dist;
            }
        }
        masks[best][idx] = 1.0;
    }
    Ok(MaskSet { masks, planes: planes.to_vec() })
}

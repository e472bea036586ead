//! Binary quantization and its relaxations.
//!
//! The two-class Gumbel-Softmax sample of a pixel with pre-quantization
//! value `a` is `sigmoid((k (2a - 1) + L) / tau)`, where `L` is standard
//! logistic noise (the difference of two Gumbel draws) and `k` is
//! [`LOGIT_GAIN`]. Without noise the sample thresholds `a` at 0.5, like
//! [`quantize_hard`].

use ndarray::{Array2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Logit gain `k` mapping `a in [0, 1]` onto `[-k, k]`.
pub const LOGIT_GAIN: f64 = 10.0;

/// Threshold at 0.5; ties go to 1.
pub fn quantize_hard(a: &Array2<f64>) -> Array2<f64> {
    a.mapv(|v| if v >= 0.5 { 1.0 } else { 0.0 })
}

/// Standard logistic samples `ln(U) - ln(1 - U)`.
pub fn logistic_noise<R: Rng>(shape: (usize, usize), rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn(shape, || {
        let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        u.ln() - (1.0 - u).ln()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surrogate {
    /// Gumbel-Softmax sample with a straight-through hard forward.
    Gumbel,
    /// Hard threshold with an identity gradient inside [0, 1].
    Unit,
}

/// Output of a relaxed quantizer: the pattern used in the forward model and
/// `dq/da` used in the backward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Relaxed {
    pub forward: Array2<f64>,
    pub soft: Array2<f64>,
    pub grad: Array2<f64>,
}

/// Gumbel-Softmax relaxation with given logistic noise. `forward` is the
/// hard sample (logit >= 0 maps to 1), `soft` the relaxed sample and `grad`
/// its exact derivative with respect to `a`.
pub fn relax_with_noise(a: &Array2<f64>, tau: f64, noise: &Array2<f64>) -> Relaxed {
    let mut forward = Array2::zeros(a.dim());
    let mut soft = Array2::zeros(a.dim());
    let mut grad = Array2::zeros(a.dim());
    Zip::from(&mut forward).and(&mut soft).and(&mut grad).and(a).and(noise).for_each(|f, s, g, &a, &n| {
        let logit = LOGIT_GAIN * (2.0 * a - 1.0) + n;
        let y = sigmoid(logit / tau);
        *f = if logit >= 0.0 { 1.0 } else { 0.0 };
        *s = y;
        *g = y * (1.0 - y) * 2.0 * LOGIT_GAIN / tau;
    });
    Relaxed { forward, soft, grad }
}

/// Seeded Gumbel-Softmax quantization: `(hard forward, surrogate gradient)`.
pub fn quantize_relaxed(a: &Array2<f64>, tau: f64, seed: u64) -> (Array2<f64>, Array2<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = logistic_noise(a.dim(), &mut rng);
    let r = relax_with_noise(a, tau, &noise);
    (r.forward, r.grad)
}

/// Unit-gradient baseline: hard threshold forward, gradient 1 for
/// `a in [0, 1]` and 0 outside.
pub fn unit_surrogate(a: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    (quantize_hard(a), a.mapv(|v| if (0.0..=1.0).contains(&v) { 1.0 } else { 0.0 }))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_threshold() {
        let a = Array2::from_shape_vec((1, 4), vec![0.7, 0.3, 0.5, 0.0]).unwrap();
        assert_eq!(quantize_hard(&a).into_raw_vec_and_offset().0, vec![1.0, 0.0, 1.0, 0.0]);
        assert!(quantize_hard(&Array2::zeros((3, 3))).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn strong_logit_almost_always_one() {
        let a = Array2::from_elem((1, 1000), 0.9);
        let (f, _) = quantize_relaxed(&a, 1e-3, 42);
        let ones = f.iter().filter(|&&v| v == 1.0).count();
        assert!(ones >= 990, "{ones}");
        assert!(f.iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn seeded_calls_are_identical() {
        let a = Array2::from_shape_fn((7, 9), |(r, c)| (r * 9 + c) as f64 / 63.0);
        assert_eq!(quantize_relaxed(&a, 0.5, 5), quantize_relaxed(&a, 0.5, 5));
        assert_ne!(quantize_relaxed(&a, 0.5, 5).0, quantize_relaxed(&a, 0.5, 6).0);
    }

    #[test]
    fn surrogate_gradient_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noise = logistic_noise((1, 5), &mut rng);
        // Symmetric logits: a = 0.5 gives a zero mean logit.
        let a = Array2::from_shape_vec((1, 5), vec![0.5, 0.45, 0.55, 0.5, 0.52]).unwrap();
        let tau = 0.7;
        let r = relax_with_noise(&a, tau, &noise);
        let h = 1e-6;
        for i in 0..5 {
            let mut up = a.clone();
            up[[0, i]] += h;
            let mut dn = a.clone();
            dn[[0, i]] -= h;
            let fd = (relax_with_noise(&up, tau, &noise).soft[[0, i]] - relax_with_noise(&dn, tau, &noise).soft[[0, i]])
                / (2.0 * h);
            assert!((fd - r.grad[[0, i]]).abs() < 1e-4);
        }
    }

    #[test]
    fn unit_gradient_window() {
        let a = Array2::from_shape_vec((1, 4), vec![-0.1, 0.0, 1.0, 1.2]).unwrap();
        let (f, g) = unit_surrogate(&a);
        assert_eq!(f.into_raw_vec_and_offset().0, vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(g.into_raw_vec_and_offset().0, vec![0.0, 1.0, 1.0, 0.0]);
    }
}

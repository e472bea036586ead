use holocgh_core::analysis::luminance::{luminance, LuminanceInput, PhotopicTable};
use holocgh_core::analysis::metrics::{psnr, ssim};
use holocgh_core::analysis::parallax::{parallax_detection_rate, ParallaxModel};
use holocgh_core::analysis::sampling::{required_views, Resolution};
use holocgh_core::wave::fourier_shift;
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(seed: u64, shape: (usize, usize)) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn(shape, || rng.gen::<f64>())
}

/// Blocky texture with plenty of corners.
fn texture(seed: u64, n: usize) -> Array2<f64> {
    let coarse = noise(seed, (n / 8, n / 8));
    Array2::from_shape_fn((n, n), |(r, c)| coarse[[r / 8, c / 8]])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn views_grow_with_depth_and_resolution(
        cpd in 1.0..42.0f64,
        d in 0.0..10.0f64,
        dd in 0.0..5.0f64,
        dc in 0.0..10.0f64,
        f in 0.01..0.1f64,
        lambda in 4e-7..7e-7f64,
    ) {
        let v = |c: f64, d: f64| required_views(Resolution::CyclesPerDegree(c), d, f, lambda, None).unwrap();
        let base = v(cpd, d);
        prop_assert!(v(cpd, d + dd).raw >= base.raw);
        prop_assert!(v(cpd, d + dd).views >= base.views);
        prop_assert!(v(cpd + dc, d).raw >= base.raw);
        prop_assert!(v(cpd + dc, d).views >= base.views);
    }

    #[test]
    fn ssim_is_symmetric(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (noise(a, (24, 20)), noise(b, (24, 20)));
        prop_assert!((ssim(&x, &y).unwrap() - ssim(&y, &x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn psnr_of_identical_images_is_infinite(a in any::<u64>(), peak in 0.1..10.0f64) {
        let x = noise(a, (16, 16));
        prop_assert_eq!(psnr(&x, &x, peak).unwrap(), f64::INFINITY);
    }

    #[test]
    fn luminance_is_linear_in_power(
        lines in prop::collection::vec((400.0..700.0f64, 0.0..1e-3f64), 1..4),
        k in 0.0..100.0f64,
        area in 1e-6..1e-3f64,
        omega in 1e-3..1.0f64,
    ) {
        let table = PhotopicTable::default();
        let input = |k: f64| LuminanceInput {
            lines: lines.iter().map(|&(nm, w)| (nm * 1e-9, w * k)).collect(),
            area,
            solid_angle: omega,
        };
        let one = luminance(&input(1.0), &table).unwrap();
        let scaled = luminance(&input(k), &table).unwrap();
        prop_assert!((scaled - k * one).abs() <= 1e-9 * (k * one).abs().max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn parallax_rate_ignores_intensity_scale(seed in any::<u64>(), shift in 0.0..8.0f64, k in 0.1..10.0f64) {
        let model = ParallaxModel::for_display(8.2e-6, 0.05);
        let a = texture(seed, 96);
        let b = fourier_shift(&a, shift.round(), 0.0);
        let r1 = parallax_detection_rate(&[a.clone()], &[b.clone()], &model);
        let r2 = parallax_detection_rate(&[&a * k], &[&b * k], &model);
        match (r1, r2) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(x.matched, y.matched);
                prop_assert_eq!(x.detected, y.detected);
            }
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "{:?} vs {:?}", x, y),
        }
    }
}

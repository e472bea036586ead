use holocgh_core::wave::{propagate_asm_with, ComplexField, PropagationKernel, Pitch, Propagator};
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(seed: u64, rows: usize, cols: usize) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Array2::from_shape_simple_fn((rows, cols), || Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    ComplexField::new(g, Pitch::square(8.2e-6), 520e-9).unwrap()
}

fn max_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn propagation_is_linear(
        seed in any::<u64>(),
        rows in 4usize..40,
        cols in 4usize..40,
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
        z in -2e-2..2e-2f64,
        sideband in any::<bool>(),
        pad in any::<bool>(),
    ) {
        let u1 = random_field(seed, rows, cols);
        let u2 = random_field(seed ^ 0x5555, rows, cols);
        let mix = ComplexField::new(&u1.grid * a + &u2.grid * b, u1.pitch, u1.wavelength).unwrap();
        let lhs = propagate_asm_with(&mix, z, sideband, pad).grid;
        let rhs = propagate_asm_with(&u1, z, sideband, pad).grid * a + propagate_asm_with(&u2, z, sideband, pad).grid * b;
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-10);
    }

    #[test]
    fn back_propagation_recovers_band_limited_field(
        seed in any::<u64>(),
        rows in 4usize..40,
        cols in 4usize..40,
        z in 1e-4..2e-2f64,
        sideband in any::<bool>(),
        wavelength in 4e-7..2e-5f64,
    ) {
        let mut u = random_field(seed, rows, cols);
        u.wavelength = wavelength;
        let back = propagate_asm_with(&propagate_asm_with(&u, z, sideband, false), -z, sideband, false);
        // the z = 0 kernel is the band-limit projection
        let prop = Propagator::for_field(&u, false);
        let projected = prop.propagate(&u.grid, &prop.kernel(0.0, sideband));
        prop_assert!(max_diff(&back.grid, &projected) <= 1e-8);
    }

    #[test]
    fn kernel_magnitude_is_bounded(
        rows in 1usize..64,
        cols in 1usize..64,
        pitch in 2e-7..2e-5f64,
        wavelength in 4e-7..2e-6f64,
        z in -5e-2..5e-2f64,
        sideband in any::<bool>(),
    ) {
        let k = PropagationKernel::new((rows, cols), Pitch::square(pitch), wavelength, z, sideband);
        prop_assert!(k.max_magnitude() <= 1.0 + 1e-15);
    }

    #[test]
    fn inputs_are_not_modified(seed in any::<u64>(), z in -1e-2..1e-2f64) {
        let u = random_field(seed, 12, 20);
        let before = u.clone();
        let _ = propagate_asm_with(&u, z, true, true);
        let prop = Propagator::for_field(&u, true);
        let _ = prop.spectrum(&u.grid);
        prop_assert_eq!(u, before);
    }
}

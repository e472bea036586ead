use holocgh_core::optics::{display_geometry, plane_depths, OpticalConfig, PlaneDepth, Resolution};
use proptest::prelude::*;

fn config(cols: usize, rows: usize, half_depth: f64, f: f64) -> OpticalConfig {
    let mut cfg = OpticalConfig::prototype();
    cfg.slm_resolution = Resolution::new(cols, rows);
    cfg.active_resolution = cfg.slm_resolution;
    cfg.half_depth = half_depth;
    cfg.eyepiece_focal_length = f;
    cfg.wrp_distance = 2.0 * half_depth;
    cfg
}

proptest! {
    #[test]
    fn plane_diopters_round_trip_to_distance(
        half_depth in 1e-3..8e-3f64,
        f in 0.03..0.08f64,
        k in 1usize..16,
    ) {
        let cfg = config(64, 64, half_depth, f);
        for p in plane_depths(&cfg, k).unwrap() {
            let back = PlaneDepth::from_diopters(&cfg, cfg.diopters_at_offset(p.offset_from_wrp));
            prop_assert!((back.distance_from_slm - p.distance_from_slm).abs() <= 1e-9);
        }
    }

    #[test]
    fn eyebox_fov_product_tracks_pixel_count(cols in 16usize..4000, rows in 16usize..3000, ch in 0usize..3) {
        let mut cfg = config(cols, rows, 5e-3, 0.04);
        cfg.eyebox_channel = Some(ch);
        let ratio = |cfg: &OpticalConfig| {
            let g = display_geometry(cfg).unwrap();
            let fov_width = 2.0 * cfg.eyepiece_focal_length * (g.fov_deg.0.to_radians() / 2.0).tan();
            g.eyebox.0 * fov_width / cfg.eyepiece_focal_length / (cfg.active_resolution.cols as f64 * cfg.wavelengths[ch])
        };
        let reference = ratio(&config(1600, 900, 5e-3, 0.04).tap(ch));
        let r = ratio(&cfg);
        prop_assert!(((r - reference) / reference).abs() <= 1e-6, "{r} vs {reference}");
    }

    #[test]
    fn geometry_is_deterministic(cols in 16usize..2000, rows in 16usize..2000) {
        let cfg = config(cols, rows, 5e-3, 0.04);
        prop_assert_eq!(display_geometry(&cfg).unwrap(), display_geometry(&cfg.clone()).unwrap());
    }
}

trait Tap {
    fn tap(self, ch: usize) -> Self;
}

impl Tap for OpticalConfig {
    fn tap(mut self, ch: usize) -> Self {
        self.eyebox_channel = Some(ch);
        self
    }
}

//! Image metrics, light-field sampling, ocular parallax and luminance.

pub mod luminance;
pub mod metrics;
pub mod parallax;
pub mod sampling;

pub use luminance::{luminance, LuminanceInput, PhotopicTable};
pub use metrics::{psnr, ssim};
pub use parallax::{mar, parallax_detection_rate, parallax_threshold, ParallaxModel};
pub use sampling::{half_depth_for_range, max_depth_range, required_views, DepthRange, Resolution, ViewRequirement};

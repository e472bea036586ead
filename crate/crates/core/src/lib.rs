//! Binary-amplitude computer-generated holography with 2.5D, 3D and 4D
//! supervision, pupil-sampled viewing simulation and the supporting
//! analysis tools (light-field sampling, ocular parallax, pairwise
//! comparison scaling).

pub mod analysis;
pub mod error;
pub mod fft;
pub mod io;
pub mod optics;
pub mod optimizer;
pub mod psychstats;
pub mod run;
pub mod targets;
pub mod viewer;
pub mod wave;

pub use error::{Error, Result};

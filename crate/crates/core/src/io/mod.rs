//! File formats: portable float maps, PNG export, bit-packed binary
//! holograms and TOML run configs.

pub mod config;
pub mod hologram;
pub mod pfm;
pub mod png;

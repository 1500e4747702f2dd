//! Mirror surface-error maps, the mirror description, thermal radius tuning
//! and the closed-loop temperature controller.

mod map;
mod mirror;
mod synth;
mod thermal;

pub use map::{load_surface_map, surface_stats, write_surface_map, SurfaceMap, SurfaceStats};
pub use mirror::{
    effective_radius, Hole, MirrorSpec, FABRICATED_FORM_CORRELATION, FABRICATED_FORM_RMS_NM, FABRICATED_FORM_SEED,
};
pub use synth::{synthesize_surface, SurfaceGrid};
pub use thermal::{simulate_temperature_control, PidParams, ThermalPlant, ThermalRun, TraceSample, TemperatureTrace};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("surface map has no valid cells")]
    EmptyMap,
    #[error("invalid surface grid: {0}")]
    Grid(String),
    #[error("correlation angle {correlation:.4} rad is resolved by only {samples:.2} grid samples (need at least 4)")]
    Resolution { correlation: f64, samples: f64 },
    #[error("invalid mirror: {0}")]
    Mirror(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum ThermalError {
    #[error("invalid thermal parameters: {0}")]
    Invalid(String),
    #[error("temperature diverged from setpoint by {deviation:.1} K at t = {time:.1} s")]
    Diverged { time: f64, deviation: f64 },
}

//! Aspheric objective: sequential ray tracing, wavefront quality and
//! single-mode collection efficiency with and without the mirror.

mod collection;
mod lens;
mod trace;
mod wavefront;

pub use collection::{
    cone_power_closed_form, power_fraction_in_cone, single_mode_collection_efficiency, step_mirror_efficiency,
    CollectionReport, StepMirror,
};
pub use lens::{asphere_sag, LensPrescription};
pub use trace::{
    effective_focal_length, trace_ray, trace_ray_detailed, working_distance, EflReport, Ray, RayStatus, Refraction,
};
pub use wavefront::{wavefront_map, WavefrontMap};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OpticsError {
    #[error("invalid lens prescription: {0}")]
    Prescription(String),
    #[error("radius {r_mm} mm lies outside the real domain of the surface")]
    SagDomain { r_mm: f64 },
    #[error("surface intersection did not converge (last iterate at {last:?} m)")]
    Intersection { last: [f64; 3] },
    #[error("{0}")]
    Input(String),
    #[error("{dead} of {total} pupil rays were lost")]
    Vignetting { dead: usize, total: usize },
    #[error("degenerate paraxial system: {0}")]
    Paraxial(String),
    #[error("waist search failed: overlap peaks at the edge of the scanned waists {waists:?}")]
    Bracket { waists: Vec<f64> },
    #[error(transparent)]
    Emission(#[from] crate::emission::EmissionError),
}

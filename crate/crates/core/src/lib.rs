//! Physics models for a trapped ion sitting at the centre of a spherical
//! mirror, collected by an aspheric objective through a slotted 3D trap.
//!
//! The crate is split by subsystem:
//!
//! * [`surface_thermal`] – mirror form maps and the temperature-controlled radius
//! * [`emission`] – mirror-modified spontaneous emission
//! * [`optics`] – ray tracing of the objective and fibre-coupling efficiency
//! * [`trap`] – boundary-element electrostatics and trap characterization

pub mod constants;
pub mod emission;
pub mod linalg;
pub mod optics;
pub mod optimize;
pub mod quadrature;
pub mod surface_thermal;
pub mod trap;

pub use nalgebra::Vector3;

//! Slotted pseudo-planar Paul trap: electrode layout, boundary-element
//! electrostatics, pseudopotential analysis, micromotion compensation and
//! slot-shape optimization.

mod bem;
mod characterize;
mod field;
mod geometry;
mod kernel;
mod mesh;
mod micromotion;
mod slot;

pub use bem::{solve_basis, BasisSet, FAR_FIELD_DIAMETERS};
pub use characterize::{
    axial_rf_residual, characterize, characterize_with, line_cuts, quartic_frequencies, CharacterizeOptions, LineCut,
    TrapReport,
};
pub use field::{ElectrodeModel, FieldValue, QuadrupoleFixture, TrapDrive, TrapPotential};
pub use geometry::{build_geometry, ElectrodeLabel, ElectrodeSet, Patch, SphereCap, TrapParams};
pub use mesh::{mesh_electrodes, plate_mesh, sphere_mesh, Panel, PanelMesh};
pub use micromotion::{compensate_micromotion, default_controls, Compensation};
pub use slot::{optimize_slot, slot_objective_terms, ObjectiveWeights, SlotEvaluation, SlotOptimization, SlotSearch};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum TrapError {
    #[error("invalid trap geometry: {0}")]
    Geometry(String),
    #[error("meshing failed: {0}")]
    Mesh(String),
    #[error("boundary-element system is ill-conditioned (condition estimate {estimate:.3e}); refine the mesh or check for overlapping panels")]
    IllConditioned { estimate: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("point {point:?} m lies inside the substrate or an electrode")]
    Domain { point: [f64; 3] },
    #[error("no trapping minimum found: {summary}")]
    NoTrap { summary: String },
    #[error("micromotion control matrix is rank deficient; uncontrollable direction {direction:?}")]
    RankDeficient { direction: [f64; 3] },
    #[error("slot optimization failed: {0}")]
    Optimization(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

//! Mild-solution Navier-Stokes integrator on a periodic box and the
//! experiments built on it.

pub mod axisym;
pub mod checkpoint;
pub mod example;
pub mod picard;
pub mod separation;
pub mod solver;
pub mod trajectory;

pub use axisym::{
    axis_tube_radius, axisymmetric_no_swirl, cylindrical_decompose, localized_swirl, swirl_fraction, symmetry_defect, trilinear,
    CylindricalDecomposition, DEFAULT_ANGLES,
};
pub use checkpoint::{checkpoint_bytes, read_checkpoint_meta, write_checkpoint, CheckpointMeta};
pub use example::{example_1_3_residual, CubicProfile, Example13Config, Example13Report};
pub use picard::{picard_iterate, Contraction, PicardReport};
pub use separation::{separation_track, weighted_distance, SeparationReport};
pub use solver::{cfl_limit, check_cfl, step_mild, MildSolverConfig, MildStepper, Scheme};
pub use trajectory::{diagnose, solve, Abort, DiagnosticOptions, Diagnostics, Marcher, Trajectory};

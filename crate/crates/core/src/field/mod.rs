//! Grids, sampled fields, weights, test functions and quadrature.

pub mod bump;
pub mod fields;
pub mod grid;
pub mod io;
pub mod quadrature;
pub mod weights;

pub use bump::{
    make_bump, make_plateau, make_spacetime_bump, make_superposition, plateau, smooth_step, BumpSampler, BumpSpec,
    TemporalSupport,
};
pub use fields::{ScalarField, SpaceTimeField, TensorField, VectorField};
pub use grid::{Grid, Point, TimeGrid, DEFAULT_T_MINUS, DEFAULT_T_PLUS, MAX_SMALL_HORIZON};
pub use io::FieldContainer;
pub use quadrature::{inner_product, spatial_integral, weighted_integral, weighted_integral_log, InnerProduct, LogReal};
pub use weights::{spatial_weight, temporal_weight, temporal_weight_derivative, SpatialExponent, WeightParams};

//! Numerical laboratory for weighted space-time estimates of the heat operator,
//! weighted Calderón–Zygmund bounds, and mild solutions of Navier–Stokes on a
//! periodic box.

pub mod error;
pub mod field;
pub mod spectral;
pub mod commutator;
pub mod weighted;
pub mod nse;

pub use error::{Error, Result};

//! Geometry, boundary conditions and the branched function containers of
//! the limit problem.

pub mod branched;
pub mod config;
pub mod grid;

pub use branched::{BranchedGrid, BranchedRadialFunction};
pub use config::{AnnulusStackConfig, BoundaryCondition, GridSpec};
pub use grid::RadialGrid;

//! Sparse symmetric linear algebra used by the finite-element solvers.

pub mod lanczos;
pub mod skyline;

pub use lanczos::{count_below, smallest_eigenpairs, EigenPair};
pub use skyline::{Ldlt, SkylineMatrix};

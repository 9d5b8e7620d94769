pub mod dispersion;
pub mod epsilon_sweep;
pub mod error;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod radial_oracle;
pub mod semigroup_sim;
pub mod specfun;

pub use error::{Error, Result};

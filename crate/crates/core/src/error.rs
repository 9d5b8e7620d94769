use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a geometric or numerical invariant.
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    /// The configuration document could not be parsed.
    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse { line: usize, column: usize, message: String },

    #[error("grids of the two branched functions do not match")]
    GridMismatch,

    #[error("invalid radial grid: {0}")]
    InvalidGrid(String),

    /// The singular `n^2/rho` term is not integrable for the given samples.
    #[error("integral diverges: {0}")]
    IntegralDiverges(String),

    #[error("argument outside the domain of the special function: {0}")]
    DomainError(String),

    #[error("suspected root of even multiplicity for n={n} near lambda in ({lo}, {hi})")]
    SuspectedEvenRoot { n: u32, lo: f64, hi: f64 },

    #[error("no singular value passed the nullspace threshold (sigma_min/sigma_max = {ratio:e})")]
    EmptyNullspace { ratio: f64 },

    #[error("interface residual {residual:e} exceeds {limit:e} for n={n}, lambda={lambda}")]
    ResidualTooLarge {
        n: u32,
        lambda: f64,
        residual: f64,
        limit: f64,
    },

    #[error("assembly contract violated: {0}")]
    AssemblyContractViolation(String),

    #[error("eigensolver failed: {message} (worst residual {residual:e})")]
    SolverError { message: String, residual: f64 },

    #[error("threshold {0} coincides with an eigenvalue; perturb it")]
    ThresholdOnEigenvalue(f64),

    #[error("mesh error: {0}")]
    MeshError(String),

    #[error("blow-up detected at t={t}: max |coefficient| = {max_coeff:e}")]
    BlowupDetected { t: f64, max_coeff: f64 },

    /// The reaction polynomial violates the growth hypothesis (H1).
    #[error("reaction term violates (H1) growth bound: {0}")]
    GrowthViolation(String),

    /// The reaction polynomial violates the dissipativeness hypothesis (H2).
    #[error("reaction term violates (H2) dissipativeness: {0}")]
    DissipativityViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors that stem from user input rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig { .. }
                | Error::ConfigParse { .. }
                | Error::InvalidGrid(_)
                | Error::GrowthViolation(_)
                | Error::DissipativityViolation(_)
                | Error::InvalidArgument(_)
        )
    }
}

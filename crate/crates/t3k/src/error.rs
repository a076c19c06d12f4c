use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by how the CLI maps them to exit statuses:
/// configuration problems exit with 2, physics-domain conditions
/// (resonances, poles, failed classification) with 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("position x = {x} lies outside the outer walls [{lo}, {hi}]")]
    OutsideBox { x: f64, lo: f64, hi: f64 },

    #[error("sampled cavity profile does not cover [{lo}, {hi}]")]
    ProfileCoverage { lo: f64, hi: f64 },

    #[error("quadrature did not converge (best estimate error {estimate:e} > tol {tol:e})")]
    QuadratureFailure { estimate: f64, tol: f64 },

    #[error("operation requires a constant cavity profile")]
    ProfileNotConstant,

    #[error("resonant configuration: {0}")]
    Resonance(String),

    #[error(
        "pole of the negative-detuning splitting: (2l+d)/xi = {argument} is within {distance:e} of {k}*pi"
    )]
    Pole { argument: f64, distance: f64, k: u64 },

    #[error("series did not converge after {j_used} terms (tail estimate {tail:e} > tol {tol:e})")]
    NonConvergent { j_used: u32, tail: f64, tol: f64 },

    #[error("symmetric/antisymmetric classification failed: {0}")]
    ClassificationFailed(String),

    #[error("state {0} is not in the basis of this Hamiltonian")]
    StateNotInBasis(String),

    #[error("kernel grid too coarse: quadrature error estimate {estimate:e} exceeds {tol:e}")]
    GridTooCoarse { estimate: f64, tol: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { path: path.into(), reason: reason.into() }
    }

    /// Process exit status the CLI contract assigns to this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

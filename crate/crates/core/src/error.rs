use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Hilbert dimension {requested} exceeds the configured cap {cap}")]
    DimensionCap { requested: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("steady state is not unique: null space has dimension {nullity}")]
    DegenerateNullSpace { nullity: usize },

    #[error("steady-state solve did not converge (relative residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("resolvent solve is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("regression matrix is not stable: eigenvalue real part {real_part:e} >= 0")]
    Unstable { real_part: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("resonator has no steady state: A- - A+ + kappa = {denominator:e} <= 0")]
    NoSteadyState { denominator: f64 },

    #[error("Fock truncation too small: tail mass {tail_mass:e} at dimension {fock_dim}, try {suggested}")]
    Truncation { tail_mass: f64, fock_dim: usize, suggested: usize },

    #[error("non-finite value produced in {context}")]
    NonFinite { context: &'static str },

    #[error("time evolution needs {terms} uniformization terms (limit {limit})")]
    TooStiff { terms: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

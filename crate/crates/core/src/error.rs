use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("pulse index m={m} corresponds to an unbounded potential (imaginary eigenfrequency); m must be >= 2")]
    UnboundedPotential { m: i64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("Hilbert-space dimension {requested} exceeds budget {budget}")]
    DimensionBudget { requested: usize, budget: usize },

    #[error("truncation not converged: mode {mode} holds {tail:.3e} in its top Fock level (limit {limit:.1e})")]
    NonConvergence { mode: String, tail: f64, limit: f64 },

    #[error("step size {dt} exceeds stability bound {bound}")]
    StepSize { dt: f64, bound: f64 },

    #[error("state not normalized: {0}")]
    Normalization(String),

    #[error("fidelity formula tr(rho_f rho_i) requires a pure reference state")]
    MixedReference,

    #[error("error tolerance unreachable: requires G(m) <= {target:.3e} but G({m_max}) = {g_at_max:.3e}")]
    Unreachable { target: f64, m_max: f64, g_at_max: f64 },

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

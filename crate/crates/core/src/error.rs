use thiserror::Error;

/// Errors raised by model construction, propagation and analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resonant configuration: dispersive reduction invalid")]
    Resonant,

    #[error("node frequencies differ ({0} vs {1}) but this coupling mode requires equal carriers")]
    FrequencyMismatch(f64, f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("qubit amplitudes not normalized: |a|^2 + |b|^2 = {0}")]
    NotNormalized(f64),

    #[error("basis mismatch: operator is {expected}, state is {found}")]
    BasisMismatch { expected: String, found: String },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension {dim} exceeds the configured cap {cap}; reduce the atom number or photon cutoff")]
    DimensionCap { dim: usize, cap: usize },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("infeasible CDE solution (mu={mu}, n={n}, k={k})")]
    Infeasible { mu: u32, n: u32, k: u32 },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

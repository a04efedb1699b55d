use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("potential is not stable: {0}")]
    NotStable(String),
    #[error("potential is not regular: {0}")]
    NotRegular(String),
    #[error("quadrature dimension {dim} exceeds cap {cap}; use sampling")]
    UseSampling { dim: usize, cap: usize },
    #[error("degenerate eigenproblem: {0}")]
    Degenerate(String),
    #[error("activity {z} is too close to the zero {zc} of the partition function")]
    NearPole { z: Complex64, zc: Complex64 },
    #[error("shift {lambda} is within tolerance of eigenvalue {closest}")]
    NearEigenvalue { lambda: Complex64, closest: Complex64 },
    #[error("contour isolation violated: {0}")]
    ContourError(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("activity {0} lies below the branch point")]
    BranchError(f64),
    #[error("missing prerequisite: {0}")]
    Missing(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, KsError>;

impl KsError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            KsError::InvalidParameter(_) | KsError::Serde(_) => 2,
            KsError::Missing(_) => 3,
            _ => 4,
        }
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("ill-conditioned sphere transform: {0}")]
    Conditioning(String),
    #[error("not a proper rotation (deviation {deviation:.3e})")]
    InvalidRotation { deviation: f64 },
    #[error("eigensolver failed to converge: {0}")]
    Convergence(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("Hermitian symmetry violated by {violation:.3e} (limit {limit:.1e})")]
    Symmetry { violation: f64, limit: f64 },
    #[error("logarithm undefined: rotation angle {angle} is at the branch cut")]
    Branch { angle: f64 },
    #[error("orientation samplings differ: {0}")]
    SamplingMismatch(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("bad file format at byte {offset}: {message}")]
    Format { offset: u64, message: String },
    #[error("truncated file: needed {needed} bytes at offset {offset}, {available} available")]
    Truncated {
        offset: u64,
        needed: u64,
        available: u64,
    },
    #[error("unsupported file version {0}")]
    Version(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PcsError {
    #[error("invalid mode configuration: {0}")]
    InvalidConfig(String),
    #[error("basis dimension {dim} exceeds the configured maximum {max}; cutoff infeasible")]
    DimensionOverflow { dim: usize, max: usize },
    #[error("mode index {j} out of range (m = {m})")]
    InvalidMode { j: usize, m: usize },
    #[error("operands belong to different bases")]
    BasisMismatch,
    #[error("generator is not anti-Hermitian (max deviation {dev:.3e})")]
    NotAntiHermitian { dev: f64 },
    #[error("generator is not block-diagonal in total photon number")]
    NotBlockDiagonal,
    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),
    #[error("photon cutoff n_max = {n_max} too small: {reason}")]
    CutoffTooSmall { n_max: usize, reason: String },
    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },
    #[error("path is not closed")]
    OpenPath,
    #[error("path construction error: {0}")]
    InvalidPath(String),
    #[error("point too close to a pole of the sphere (theta = {theta})")]
    PoleContact { theta: f64 },
    #[error("successive overlaps vanish; path is under-sampled (|overlap| = {magnitude:.3e})")]
    UnderSampled { magnitude: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("quadrature grid insufficient: {0}")]
    InsufficientGrid(String),
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, PcsError>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("magnon number {n} out of range for L = {l}")]
    SectorRange { l: usize, n: usize },
    #[error("full-space operation needs L <= {max}, got L = {l}")]
    FullSpaceGuard { l: usize, max: usize },
    #[error("dense diagonalization needs dimension <= {max}, got {dim}")]
    DenseGuard { dim: usize, max: usize },
    #[error("momentum {k} is not quantized for this geometry")]
    Momentum { k: f64 },
    #[error("krylov propagation failed: {0}")]
    Krylov(String),
    #[error("invalid pulse sequence: {0}")]
    Sequence(String),
    #[error("basis mismatch: {0}")]
    Basis(String),
    #[error("insufficient statistics: {0}")]
    Statistics(String),
    #[error("invalid region: {0}")]
    Region(String),
    #[error("signal analysis failed: {0}")]
    Signal(String),
    #[error("malformed snapshot data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

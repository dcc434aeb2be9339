use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("empty configuration")]
    EmptyConfig,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] magnon_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::EmptyConfig | CliError::Config(_) => 2,
            CliError::Core(magnon_core::Error::FullSpaceGuard { .. } | magnon_core::Error::DenseGuard { .. }) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

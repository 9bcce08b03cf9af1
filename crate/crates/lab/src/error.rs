use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },
    #[error("malformed config {path}: {source}")]
    ParseConfig { path: PathBuf, source: serde_json::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] pursuit_core::Error),
}

impl LabError {
    /// 1 for anything the caller can fix by changing the inputs, 2 when the
    /// numerics broke down.
    pub fn exit_code(&self) -> i32 {
        use pursuit_core::Error as E;
        match self {
            LabError::Core(
                E::InvalidArgument(_)
                | E::NoEquilibrium(_)
                | E::NonPositiveDistance(_)
                | E::ZeroEvaderSpeed
                | E::ImmediateCapture,
            ) => 1,
            LabError::Core(_) | LabError::Csv(_) | LabError::Json(_) => 2,
            _ => 1,
        }
    }
}

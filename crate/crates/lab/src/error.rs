use std::path::PathBuf;

use sagqg_core::Error as CoreError;

/// Failures of the command-line laboratory.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// Bad flags, config keys or values.
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl LabError {
    pub fn usage(msg: impl Into<String>) -> Self {
        LabError::Usage(msg.into())
    }

    /// 2 for anything the caller can fix by changing the input, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Usage(_) => 2,
            LabError::Io { .. } => 1,
            LabError::Core(e) => match e {
                CoreError::InvalidSpec(_) | CoreError::InvalidArgument(_) | CoreError::Domain { .. } => 2,
                _ => 1,
            },
        }
    }
}

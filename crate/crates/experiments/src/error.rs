use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] holomimo::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("replay mismatch: {0}")]
    Mismatch(String),
}

impl RunError {
    /// 2 for bad input, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(holomimo::Error::Schema { .. } | holomimo::Error::Io(_)) => 2,
            RunError::Numerical(_) | RunError::Io(_) | RunError::Mismatch(_) => 3,
        }
    }
}

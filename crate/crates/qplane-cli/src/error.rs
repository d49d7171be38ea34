use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed flags or configuration; exit code 2.
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Numeric(#[from] qplane::QError),

    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),

    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("cannot write JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

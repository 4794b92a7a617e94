use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    /// Configuration or argument problem, with the offending field path.
    #[error("{path}: {msg}")]
    Config { path: String, msg: String },

    #[error(transparent)]
    Estimator(#[from] ecf_robust::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        BenchError::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// Process exit code: 1 for validation problems, 2 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Io(_) => 2,
            BenchError::Csv(e) if e.is_io_error() => 2,
            BenchError::Json(e) if e.is_io() => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

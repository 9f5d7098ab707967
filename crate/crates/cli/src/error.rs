use fxpca::FxError;

/// Failure of a CLI run. Each variant owns one exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    /// The message on a single line, prefixed by its kind.
    pub fn one_line(&self) -> String {
        let text = self.to_string();
        text.split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

impl From<FxError> for CliError {
    fn from(e: FxError) -> Self {
        let msg = e.to_string();
        match e {
            FxError::InvalidParameter { .. } => CliError::Usage(msg),
            FxError::Degenerate(_) | FxError::NoConvergence { .. } => CliError::Degenerate(msg),
            FxError::DimensionMismatch { .. }
            | FxError::NegativeEntry { .. }
            | FxError::NonFinite { .. }
            | FxError::Empty(_) => CliError::Data(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

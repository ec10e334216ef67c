use qfi_core::QfiError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or input files.
    #[error("{0}")]
    Usage(String),
    /// The computation itself failed (caps, singular statistics, …).
    #[error("{0}")]
    Numerical(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) | CliError::Io { .. } => 2,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

impl From<QfiError> for CliError {
    fn from(e: QfiError) -> Self {
        use QfiError::*;
        match e {
            DimensionMismatch { .. }
            | InvalidState(_)
            | InvalidArgument(_)
            | SiteOutOfRange { .. }
            | NotPure
            | PauliSizeMismatch(..)
            | InvalidCode(_)
            | Parse { .. }
            | EvenBlockCount(_) => CliError::Usage(e.to_string()),
            CapExceeded { .. }
            | NotDifferentiable { .. }
            | SingularOutcome { .. }
            | NonOrthonormalBasis(_)
            | Unidentifiable(_)
            | FlatLikelihood => CliError::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QfiError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} exceeds the dense cap of {cap} qubits (requested {requested})")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("site {site} out of range for {n} qubits")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("state derivative connects two null eigenvectors (weight {weight:.3e}); family is not differentiable on its support")]
    NotDifferentiable { weight: f64 },

    #[error("singular outcome {outcome}: probability {probability:.3e} with derivative {derivative:.3e}")]
    SingularOutcome {
        outcome: usize,
        probability: f64,
        derivative: f64,
    },

    #[error("probe must be a pure state")]
    NotPure,

    #[error("code basis is not orthonormal (max deviation {0:.3e})")]
    NonOrthonormalBasis(f64),

    #[error("pauli size mismatch: {0} vs {1} qubits")]
    PauliSizeMismatch(usize, usize),

    #[error("invalid stabilizer code: {0}")]
    InvalidCode(String),

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("formula derived for odd block count (got {0})")]
    EvenBlockCount(usize),

    #[error("Fisher information {0:.3e} is not positive; parameter unidentifiable")]
    Unidentifiable(f64),

    #[error("unidentifiable sample: log-likelihood is flat over the search interval")]
    FlatLikelihood,
}

pub type Result<T> = std::result::Result<T, QfiError>;

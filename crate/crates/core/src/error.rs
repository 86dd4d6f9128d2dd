use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("parameter slot {slot} out of range for a parameter vector of length {len}")]
    ParamSlotOutOfRange { slot: usize, len: usize },
    #[error("parameter slot {0} is shared by several gates; shift rules need one gate per slot")]
    SharedParamSlot(usize),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("register of width {0} is not supported (need 1..={max})", max = crate::qsim::MAX_QUBITS)]
    InvalidRegister(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("partial trace needs a non-empty set of distinct qubits to keep")]
    InvalidKeepSet,
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("parameter vector must have positive dimension")]
    EmptyParams,
    #[error("parameter vector contains a non-finite entry at {0}")]
    NonFiniteParam(usize),
    #[error("{features} features cannot be encoded on {n_qubits} qubits")]
    TooManyFeatures { features: usize, n_qubits: usize },
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("invalid loss specification: {0}")]
    InvalidLoss(String),
    #[error("normal equations are singular (ridge lambda = {0})")]
    SingularSystem(f64),
    #[error("non-finite loss at {stage} iteration {iter}; the step size is likely too large")]
    NonFiniteLoss { stage: &'static str, iter: usize },
    #[error("invalid configuration `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },
    #[error("invalid signal-state index {0}")]
    InvalidSignalState(usize),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

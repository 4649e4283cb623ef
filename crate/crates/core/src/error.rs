use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid basis symbol {symbol:?} at position {position} (expected one of 0, 1, +, -)")]
    BasisSymbol { position: usize, symbol: char },

    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("parameter index {index} out of range (circuit has {n_params} parameters)")]
    ParamOutOfRange { index: usize, n_params: usize },

    #[error("state is not normalised (norm squared {norm_sqr})")]
    NotNormalised { norm_sqr: f64 },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{n_qubits} qubits exceeds the dense-method limit of {limit}")]
    TooLarge { n_qubits: usize, limit: usize },

    #[error("eigensolver did not converge")]
    NoConvergence,

    #[error("non-finite energy at iteration {iteration}")]
    NonFinite { iteration: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

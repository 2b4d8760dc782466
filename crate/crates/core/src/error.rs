use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis index {index} out of range for {n} qubits")]
    BasisOutOfRange { index: usize, n: usize },
    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("gate uses qubit {0} twice")]
    DuplicateQubit(usize),
    #[error("qubit count mismatch: expected {expected}, got {got}")]
    QubitCountMismatch { expected: usize, got: usize },
    #[error("mapping on {size} indices is not a bijection")]
    NotBijective { size: usize },
    #[error("qubit ranges overlap")]
    OverlappingRanges,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("{a} is not coprime to {modulus}")]
    NotCoprime { a: u64, modulus: u64 },
    #[error("empty list of basis states")]
    EmptySubspace,
}

pub type Result<T> = std::result::Result<T, Error>;

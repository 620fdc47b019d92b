use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry count {found} does not match shape {rows}x{cols}")]
    BadShape {
        rows: usize,
        cols: usize,
        found: usize,
    },
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("dimension {dim} exceeds the configured maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("vector norm {norm} differs from 1 by more than the normalization tolerance {tol:e}")]
    NotNormalized { norm: f64, tol: f64 },
    #[error("operator is not hermitian: max |A - A^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("operator is not a projector: {reason}")]
    NotProjector { reason: String },
    #[error("operator is not a density matrix: {reason}")]
    NotDensity { reason: String },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("duplicate power id `{0}`")]
    DuplicateId(String),
    #[error("unknown power id `{0}`")]
    UnknownId(String),
    #[error("graph has {nodes} nodes, above the clique-enumeration cap of {cap}")]
    TooManyNodes { nodes: usize, cap: usize },
    #[error("potential state of affairs is empty")]
    EmptyPsa,
    #[error("valuation is not reproducible by any density matrix (residual {residual:e})")]
    InconsistentPsa { residual: f64 },
    #[error("valuation entry for `{id}` is {value}, outside [0, 1]")]
    PotentiaOutOfRange { id: String, value: f64 },
    #[error("valuation has no entry for power `{0}`")]
    MissingEntry(String),
    #[error("operation requires a pure state")]
    MixedStateInput,
    #[error("operation requires a density-matrix state")]
    PureStateInput,
    #[error("outcome index {index} out of range for {count} outcomes")]
    OutcomeOutOfRange { index: usize, count: usize },
    #[error("selected outcome has probability {probability}")]
    ZeroProbabilityOutcome { probability: f64 },
    #[error("no eigenvalue of the observable matches {0}")]
    NoSuchEigenvalue(f64),
    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),
    #[error("operation requires a two-qubit state, got {d1}x{d2}")]
    NotQubitPair { d1: usize, d2: usize },
    #[error("measurement direction is not a unit vector (norm {norm})")]
    NotUnitDirection { norm: f64 },
    #[error("dimension {dim} outside the supported range {min}..={max}")]
    DimensionOutOfRange { dim: usize, min: usize, max: usize },
    #[error("subspace needs at least one basis vector")]
    EmptySubspace,
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

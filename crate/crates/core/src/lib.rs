//! Finite-dimensional quantum formalism: composite systems and partial
//! traces, separability of pure and mixed states, projective measurement,
//! graphs of commuting powers with their maximal contexts, and Born-rule
//! valuations together with the reconstruction of a density matrix from them.
//!
//! ```
//! use std::sync::Arc;
//! use qtool_core::{fixtures, psa};
//!
//! let family = Arc::new(psa::informationally_complete_family(2)?);
//! let valuation = psa::evaluate_psa(&fixtures::ket_plus(), family)?;
//! let rebuilt = psa::reconstruct_density(&valuation)?;
//! assert!(rebuilt.complete);
//! # Ok::<(), qtool_core::Error>(())
//! ```

pub mod entanglement;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod measurement;
pub mod operator;
pub mod psa;
pub mod random;
pub mod scenario;
pub mod tolerance;

pub use error::{Error, Result};
pub use operator::{
    born_rule, expectation, partial_trace, spectral_decompose, tensor, ComplexMatrix,
    DensityMatrix, Factor, HermitianOperator, Projector, QuantumState, State, StateVector,
};

//! Numerical tolerances and size limits.
//!
//! All comparisons against these values use the max-entry norm unless a
//! constant says otherwise.

use std::sync::OnceLock;

/// Unit-norm check for state vectors.
pub const NORM: f64 = 1e-9;
/// Unit-trace check for density matrices.
pub const TRACE: f64 = 1e-9;
/// Hermiticity check, `max |A - A†|`.
pub const HERMITIAN: f64 = 1e-9;
/// Idempotence check for projectors, `max |P² - P|`.
pub const IDEMPOTENT: f64 = 1e-9;
/// Lowest admissible eigenvalue of a density matrix is `-PSD`.
pub const PSD: f64 = 1e-9;
/// Eigenvalue tolerance for projector spectra and spectral completeness.
pub const EIGEN: f64 = 1e-8;
/// Eigenvalues closer than this are merged into one eigenprojector.
pub const DEGENERACY: f64 = 1e-8;
/// Two powers commute when `max |PQ - QP|` is at most this.
pub const COMMUTATOR: f64 = 1e-9;
/// A potentia within this of 1 (or 0) counts as certain.
pub const REALITY: f64 = 1e-9;
/// Maximum residual of a complete reconstruction.
pub const RECONSTRUCTION: f64 = 1e-8;
/// Residual above which a full-rank valuation is rejected as non-quantum.
pub const INCONSISTENCY: f64 = 1e-6;
/// Schmidt coefficients below this are dropped.
pub const SCHMIDT: f64 = 1e-10;
/// Outcomes at or below this probability cannot be selected deterministically.
pub const PROBABILITY: f64 = 1e-12;

pub const DEFAULT_MAX_DIM: usize = 64;
pub const DEFAULT_CLIQUE_CAP: usize = 24;

/// Environment variable overriding [`DEFAULT_MAX_DIM`].
pub const MAX_DIM_ENV: &str = "QTOOL_MAX_DIM";

/// Largest total Hilbert-space dimension accepted by constructors that
/// compose spaces. Read once from `QTOOL_MAX_DIM`, falling back to 64.
pub fn max_dim() -> usize {
    static MAX: OnceLock<usize> = OnceLock::new();
    *MAX.get_or_init(|| {
        std::env::var(MAX_DIM_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&v| v > 0)
            .unwrap_or(DEFAULT_MAX_DIM)
    })
}

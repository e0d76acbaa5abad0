//! Error type shared by every module.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the solver toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-facing parameter (mesh level, medium value, config field).
    #[error("configuration error: {0}")]
    Config(String),

    /// API misuse such as mixing objects built on different meshes.
    #[error("usage error: {0}")]
    Usage(String),

    /// Operands built on different meshes or quadratures.
    #[error("mesh mismatch: expected id {expected}, got {actual}")]
    MeshMismatch { expected: u64, actual: u64 },

    /// Evaluation point too close to the surface for plain quadrature.
    #[error("near-singular evaluation: point at distance {distance:.3e} from the surface (minimum {minimum:.3e})")]
    NearSingularEvaluation { distance: f64, minimum: f64 },

    /// Singular or ill-conditioned dense system.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Schur scalar of the block inverse below the resonance threshold.
    #[error("near resonance: Schur scalar {schur:.3e} below threshold {threshold:.3e}")]
    NearResonance { schur: f64, threshold: f64 },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Precondition of an estimate violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Iterative method did not converge.
    #[error("no convergence after {iterations} iterations: {detail}")]
    NonConvergence { iterations: usize, detail: String },

    /// Wrong number of resonances located in a search disk.
    #[error("multiplicity anomaly: found {found} minima, expected {expected}")]
    MultiplicityAnomaly { found: usize, expected: usize },

    /// Geometry not supported by a closed-form oracle.
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    /// Input/output failure while reading or writing artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

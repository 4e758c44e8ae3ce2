//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by operator construction, model validation, and the
/// analytic approximation schemes.
#[derive(Debug, Error)]
pub enum RabiError {
    /// A dimension argument is out of range (e.g. a qudit with d < 2).
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// An argument violates a precondition that is not a dimension mismatch.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Model parameters violate their invariants.
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    /// The Fock-space cutoff is below the adequacy rule for the requested
    /// couplings.
    #[error("inadequate Fock truncation: {0}")]
    TruncationInadequate(String),

    /// Two operands live on spaces of different dimension.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A numerical contract was violated (non-Hermitian input to a Hermitian
    /// routine, non-unit trace, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Dispersive parameters are undefined at (or too close to) resonance.
    #[error("resonant parameters: {0}")]
    Resonance(String),

    /// A perturbative expression has a vanishing denominator.
    #[error("singular denominator: {0}")]
    SingularDenominator(String),

    /// The two GHZ branches coincide and the requested combination is
    /// ill-defined.
    #[error("degenerate GHZ branches: {0}")]
    DegenerateBranches(String),

    /// The requested analytic expression does not cover these parameters.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// LAPACK failed to converge or rejected its arguments.
    #[error("eigensolver failure: LAPACK info = {0}")]
    Eigensolver(i32),
}

pub type Result<T> = std::result::Result<T, RabiError>;

//! Error type shared by every module of the crate.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration field violates its invariant.
    InvalidConfig(String),
    /// Two inputs that must describe the same crystal disagree in size.
    DimensionMismatch { expected: usize, actual: usize },
    /// The equilibrium solver ran out of iterations or stalled.
    EquilibriumNonConvergence { residual: f64, iterations: usize },
    /// A mode eigenvalue is not positive: the parameters are outside the
    /// linear-chain regime.
    UnstableCrystal { lambda: f64 },
    /// The mode matrix contains non-finite entries.
    NonFiniteMatrix,
    /// Eigenvector tracking lost a branch between two sweep steps.
    AlignmentFailure { step: usize, overlap: f64 },
    /// An internally computed quantity violates a consistency bound.
    InternalConsistency(String),
    /// The requested Fock space is larger than the oracle guard allows.
    FockDimensionGuard { n_modes: usize, max: usize },
    /// Observables still move when the Fock cutoff is raised.
    CutoffNotConverged { cutoff: usize, delta: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            Error::EquilibriumNonConvergence { residual, iterations } => write!(
                f,
                "equilibrium solver did not converge after {iterations} iterations \
                 (last residual {residual:.3e}); bad initial guess or pathological ion count"
            ),
            Error::UnstableCrystal { lambda } => write!(
                f,
                "unstable crystal: non-positive mode eigenvalue {lambda:.6e} \
                 (parameters outside the linear-chain regime)"
            ),
            Error::NonFiniteMatrix => write!(f, "mode matrix contains non-finite entries"),
            Error::AlignmentFailure { step, overlap } => write!(
                f,
                "eigenvector alignment failed at sweep step {step} (best overlap {overlap:.3}); \
                 use a finer time grid"
            ),
            Error::InternalConsistency(msg) => write!(f, "internal consistency failure: {msg}"),
            Error::FockDimensionGuard { n_modes, max } => write!(
                f,
                "Fock-space oracle supports at most {max} modes, requested {n_modes}"
            ),
            Error::CutoffNotConverged { cutoff, delta } => write!(
                f,
                "oracle not converged at cutoff {cutoff} (delta {delta:.3e}); raise the cutoff"
            ),
        }
    }
}

impl std::error::Error for Error {}

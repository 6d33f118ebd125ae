//! Error type shared by the simulation kernels.

use thiserror::Error;

/// Errors surfaced by the channel, precoding, metrics, and GA layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operands do not have compatible shapes for the requested operation.
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    /// An argument violates the operation's domain contract.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Noise power must be strictly positive for the leakage matrix to stay
    /// positive definite.
    #[error("noise power must be positive, got {0}")]
    NonPositiveNoisePower(f64),

    /// Steering angles are limited to the front half-plane of the array.
    #[error("angle {0} rad outside [-pi/2, pi/2]")]
    AngleOutOfRange(f64),

    /// A matrix required to be Hermitian positive definite failed the
    /// Cholesky pivot test.
    #[error("matrix not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    /// The stacked effective channel is too ill-conditioned to invert.
    #[error("stacked effective channel is numerically singular (condition estimate {cond:.3e})")]
    SingularChannel { cond: f64 },

    /// The Jacobi sweep failed to drive the off-diagonal mass below
    /// tolerance.
    #[error(
        "eigen solver did not converge after {sweeps} sweeps (off-diagonal norm {off_diag:.3e})"
    )]
    EigenNonConvergence { sweeps: usize, off_diag: f64 },

    /// The zero-forcing baseline only supports single-antenna receivers.
    #[error("zero forcing requires single-antenna receivers; node {node} has {rx} antennas")]
    MultiAntennaUnsupported { node: usize, rx: usize },

    /// Refusal to enumerate a search space beyond the exhaustive-search cap.
    #[error("search space of {bits} bits exceeds the exhaustive-search cap of {cap} bits")]
    SearchSpaceTooLarge { bits: usize, cap: usize },

    /// A fitness callback returned a value outside `[0, +inf)`.
    #[error("fitness must be finite and nonnegative, got {0}")]
    InvalidFitness(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Parallel-in-time sampling of score-based diffusion models on the SO(3)
//! rotation manifold.
//!
//! The crate is organized around five building blocks:
//!
//! - [`so3`] — singularity-safe Exp/Log maps, composition, and geodesic
//!   distance for 3×3 rotation matrices and their axis-angle tangents.
//! - [`diffusion`] — variance-exploding noise schedules, the isotropic
//!   perturbation kernel on SO(3), and multiplicative forward noising.
//! - [`score`] — the [`score::ScoreModel`] evaluation contract together with
//!   analytic tangent-Gaussian mixture oracles, a calibrated-cost wrapper for
//!   latency experiments, and a tabulated-score interchange format.
//! - [`sampler`] — sequential probability-flow-ODE and geodesic-random-walk
//!   baselines, plus the windowed Picard fixed-point sampler that refines a
//!   whole trajectory segment per sweep and evaluates the score at all window
//!   positions concurrently.
//! - [`harness`] — seeded experiment runner, angular-distance quality
//!   metrics, algorithm-inefficiency accounting, and text export formats.
//!
//! Everything is deterministic for a fixed seed, independent of thread count.
//! See the `examples/` directory for one runnable walk-through per capability;
//! the `so3-picard` binary exposes the same machinery as a small CLI.

pub mod diffusion;
pub mod harness;
pub mod sampler;
pub mod score;
pub mod so3;
pub mod symmetry;

pub use so3::{Rotation, Tangent};

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A matrix failed the rotation invariants (orthonormality / determinant).
    #[error("not a rotation matrix: {reason} (residual {residual:.3e})")]
    NotARotation { reason: String, residual: f64 },
    /// A text file did not match its expected format.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    /// A tabulated score was queried outside the noise range it covers.
    #[error("sigma {sigma} outside tabulated range [{min}, {max}]")]
    SigmaOutOfRange { sigma: f64, min: f64, max: f64 },
    /// Two runs were compared that do not share a comparable configuration.
    #[error("runs are not comparable: {0}")]
    InvalidComparison(String),
    /// An internal consistency guard tripped; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

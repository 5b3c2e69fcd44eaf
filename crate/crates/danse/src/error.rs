//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by configuration validation, integration, fitting, and
/// ensemble runs.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration field is out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The integrator produced a non-finite amplitude, typically from a
    /// step size too large for the spectral radius of the current state.
    #[error("integration diverged at t = {t}: {detail}")]
    Diverged { t: f64, detail: String },

    /// A moment of an all-zero density profile was requested.
    #[error("density profile has zero total weight; moment undefined")]
    EmptyDensity,

    /// An exponential-localization fit found a nonnegative slope, i.e. the
    /// profile does not decay away from the center.
    #[error("profile is not localized (log-density slope {slope} >= 0)")]
    NoLocalization { slope: f64 },

    /// A diffusion fit found a nonpositive slope of the spread vs time.
    #[error("no diffusive growth (spread slope {slope} <= 0)")]
    NoDiffusion { slope: f64 },

    /// The band-center localization length diverges at zero disorder.
    #[error("localization length is infinite at W = 0")]
    InfiniteLocLength,

    /// Laser exactly on resonance; the dipole potential formula diverges.
    #[error("detuning is zero (laser on resonance)")]
    Resonance,

    /// Collapse fitting found no common scaled-axis overlap between curves.
    #[error("no overlap between scaled curves anywhere in the search interval")]
    NoOverlap,

    /// A fit was requested on data that cannot support it (too few points,
    /// degenerate abscissas, non-positive values where a log is needed).
    #[error("fit failed: {0}")]
    FitFailed(String),

    /// More than the tolerated fraction of ensemble realizations failed.
    #[error("ensemble aborted: {failed} of {total} realizations failed; first error: {first}")]
    EnsembleFailed {
        failed: usize,
        total: usize,
        first: String,
    },

    /// Checkpoint file I/O or decoding failed.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

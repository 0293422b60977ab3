//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Configuration document could not be parsed.
    #[error("config parse error: {0}")]
    Parse(String),

    /// A configuration field violates its physical bound.
    #[error("config constraint violated: {field}: {message}")]
    Constraint { field: String, message: String },

    /// The steady-state cubic has no real non-negative root.
    #[error("no physical steady-state root (no real root >= 0)")]
    NoPhysicalRoot,

    /// Closed-form exceptional point requires degenerate bare modes.
    #[error("closed-form exceptional point requires omega1 == omega2; scan the splitting minimum instead")]
    DetunedModes,

    /// Transmission is monotonic over the scanned loss range.
    #[error("no interior transmission minimum in gamma_tip range [{lo:.6e}, {hi:.6e}]")]
    NoInteriorMinimum { lo: f64, hi: f64 },

    /// Common response denominator collapsed below its natural scale.
    #[error("singular response denominator (|den| < 1e-30 of its natural scale)")]
    SingularDenominator,

    /// Richardson levels of the phase derivative disagree.
    #[error("group-delay derivative not converged: levels differ by {rel:.3e} relative")]
    NonConverged { rel: f64 },

    /// Integration step fails the resolution precondition.
    #[error("integration step too large: dt = {dt:.3e} s exceeds {max:.3e} s")]
    StepTooLarge { dt: f64, max: f64 },

    /// A state variable blew past any physical scale.
    #[error("time-domain integration diverged at t = {at:.6e} s")]
    Diverged { at: f64 },

    /// Demodulation window shorter than ten probe periods.
    #[error("demodulation window too short: {periods} whole probe periods (need >= 10)")]
    WindowTooShort { periods: usize },

    /// Sweep specification is malformed.
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
}

//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violated a domain invariant (non-positive lifetime,
    /// negative rate, coherence time beyond the radiative bound, ...).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// Closed forms assume the oscillatory branch μ² = Ω² − ((Γ₁−Γ₂)/2)² > 0.
    /// Outside it, use the numeric dynamics or the analytic continuation.
    #[error("drive is outside the underdamped (oscillatory) domain: mu^2 = {mu_sq} rad^2/ns^2")]
    UnderdampedDomain { mu_sq: f64 },

    /// Time or frequency grids must be strictly increasing (and uniform for
    /// convolution-based operations).
    #[error("bad grid: {0}")]
    BadGrid(String),

    /// Grid spacing too coarse to resolve the requested linewidth.
    #[error("grid too coarse: spacing {spacing} exceeds {limit} ({what})")]
    GridTooCoarse { spacing: f64, limit: f64, what: &'static str },

    /// A correlator was handed an empty photon stream.
    #[error("empty photon stream")]
    EmptyStream,

    /// Optimizer failed to converge within the iteration budget.
    #[error("fit did not converge after {iterations} iterations (residual {residual})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// The data cannot constrain the requested model (too few points, no
    /// curvature, all points in one regime, ...).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Spectrum shows fewer than three resolvable features; the Rabi
    /// splitting cannot be initialized from it.
    #[error("no resolvable sidebands: found {found} spectral feature(s), need 3")]
    NoSidebands { found: usize },

    /// Cross-correlation data is symmetric within noise; the heralding
    /// order is undecidable.
    #[error("cascade order is ambiguous: {0}")]
    AmbiguousCascade(String),

    /// Tag-file parsing / format error.
    #[error("tag file: {0}")]
    TagFormat(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam { name, reason: reason.into() }
    }

    /// Exit-code class used by command-line front ends:
    /// 1 usage/config, 2 domain, 3 non-convergence.
    pub fn exit_class(&self) -> i32 {
        match self {
            Error::InvalidParam { .. } | Error::BadGrid(_) | Error::TagFormat(_) => 1,
            Error::NonConvergence { .. } => 3,
            _ => 2,
        }
    }
}

//! Quantum-jump photon streams and a time-tag correlator.
//!
//! [`jump::simulate_stream`] unravels the same master equation as
//! [`crate::bloch`] into stochastic trajectories whose emission times form a
//! photon stream; [`correlate()`](correlate::correlate) histograms pairwise delays into g²(τ). The
//! two are statistically consistent with the closed forms by construction,
//! which makes the stream generator + correlator pair an end-to-end check of
//! the whole stack.
//!
//! Time tags are integers in picoseconds (`u64`), matching the binary and
//! CSV wire formats in [`tags`]. Randomness comes from the counter-based
//! ChaCha8 generator seeded explicitly; sub-streams for independent segments
//! should use the same seed with distinct `set_stream` values and discard a
//! 10·T₁ burn-in after concatenation.

pub mod correlate;
pub mod jump;
pub mod tags;

pub use correlate::{correlate, cross_correlate, Normalization};
pub use jump::{blinking_modulated_stream, simulate_stream};

use crate::error::{Error, Result};

/// A detected photon stream: sorted arrival tags (ps) over a total duration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhotonStream {
    tags_ps: Vec<u64>,
    duration_ps: u64,
    seed: u64,
}

impl PhotonStream {
    pub fn new(tags_ps: Vec<u64>, duration_ps: u64, seed: u64) -> Result<Self> {
        for w in tags_ps.windows(2) {
            if w[1] < w[0] {
                return Err(Error::TagFormat("tags not sorted".into()));
            }
        }
        if let Some(&last) = tags_ps.last() {
            if last > duration_ps {
                return Err(Error::TagFormat(format!(
                    "tag {last} beyond stream duration {duration_ps}"
                )));
            }
        }
        Ok(Self { tags_ps, duration_ps, seed })
    }

    pub fn tags_ps(&self) -> &[u64] {
        &self.tags_ps
    }

    pub fn duration_ps(&self) -> u64 {
        self.duration_ps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.tags_ps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags_ps.is_empty()
    }

    /// Mean detected rate in photons per ns.
    pub fn rate_per_ns(&self) -> f64 {
        if self.duration_ps == 0 {
            return 0.0;
        }
        self.tags_ps.len() as f64 / (self.duration_ps as f64 * 1e-3)
    }
}

/// Correlogram binning and normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorrelogramConfig {
    pub bin_width_ps: u64,
    pub max_tau_ps: u64,
    pub normalization: Normalization,
}

impl CorrelogramConfig {
    pub fn new(bin_width_ps: u64, max_tau_ps: u64, normalization: Normalization) -> Result<Self> {
        if bin_width_ps == 0 {
            return Err(Error::invalid("bin_width_ps", "must be > 0"));
        }
        if max_tau_ps < 10 * bin_width_ps {
            return Err(Error::invalid(
                "max_tau_ps",
                format!("must be >= 10 bins ({} ps)", 10 * bin_width_ps),
            ));
        }
        Ok(Self { bin_width_ps, max_tau_ps, normalization })
    }

    /// Number of bins on each side of zero delay.
    pub fn bins_per_side(&self) -> usize {
        self.max_tau_ps.div_ceil(self.bin_width_ps) as usize
    }
}

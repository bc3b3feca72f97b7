//! Sampled correlation and spectrum curves with axis metadata.

use crate::error::{Error, Result};
use crate::float::Real;

/// What a [`CorrelationTrace`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    /// Incoherent part of the first-order field coherence, normalized to 1 at τ=0.
    G1Incoh,
    /// Second-order intensity correlation g²(τ).
    G2,
    /// Cross-correlation between two detection channels.
    Cross,
    /// First-order interference visibility.
    Visibility,
}

/// A correlation curve sampled on a strictly increasing delay grid.
///
/// Delays are in picoseconds (the wire unit); values are dimensionless.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTrace<T: Real> {
    taus_ps: Vec<T>,
    values: Vec<T>,
    kind: TraceKind,
}

impl<T: Real> CorrelationTrace<T> {
    pub fn new(taus_ps: Vec<T>, values: Vec<T>, kind: TraceKind) -> Result<Self> {
        if taus_ps.len() != values.len() {
            return Err(Error::BadGrid(format!(
                "length mismatch: {} delays vs {} values",
                taus_ps.len(),
                values.len()
            )));
        }
        if taus_ps.is_empty() {
            return Err(Error::BadGrid("empty trace".into()));
        }
        ensure_strictly_increasing(&taus_ps)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadGrid("non-finite value in trace".into()));
        }
        Ok(Self { taus_ps, values, kind })
    }

    pub fn taus_ps(&self) -> &[T] {
        &self.taus_ps
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.taus_ps.iter().copied().zip(self.values.iter().copied())
    }

    /// Grid step if the delay grid is uniform (within 1e-9 relative), else an error.
    pub fn uniform_step_ps(&self) -> Result<T> {
        uniform_step(&self.taus_ps)
    }

    /// Replace the values, keeping grid and kind (used by instrument ops).
    pub(crate) fn with_values(&self, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), self.taus_ps.len());
        Self { taus_ps: self.taus_ps.clone(), values, kind: self.kind }
    }
}

/// How the closed-form spectrum treats the steady-state population factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMode {
    /// Evaluate the population factor with the spectral offset Δω substituted
    /// into its detuning slot, following the formula text verbatim.
    Literal,
    /// Evaluate the population factor at the laser detuning (a constant over
    /// the spectrum); the physically standard reading and the default.
    Standard,
    /// Produced by the numeric master-equation route rather than a closed form.
    Numeric,
}

/// Emission spectrum sampled on a strictly increasing offset grid.
///
/// Offsets are angular frequencies in rad/ns relative to the bare emitter
/// resonance; intensities are a spectral density (dimensionless · ns).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace<T: Real> {
    offsets: Vec<T>,
    intensities: Vec<T>,
    mode: SpectrumMode,
    warnings: Vec<String>,
}

impl<T: Real> SpectrumTrace<T> {
    pub fn new(offsets: Vec<T>, intensities: Vec<T>, mode: SpectrumMode) -> Result<Self> {
        if offsets.len() != intensities.len() {
            return Err(Error::BadGrid(format!(
                "length mismatch: {} offsets vs {} intensities",
                offsets.len(),
                intensities.len()
            )));
        }
        if offsets.is_empty() {
            return Err(Error::BadGrid("empty spectrum".into()));
        }
        ensure_strictly_increasing(&offsets)?;
        if intensities.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadGrid("non-finite intensity".into()));
        }
        Ok(Self { offsets, intensities, mode, warnings: Vec::new() })
    }

    /// Offsets in rad/ns.
    pub fn offsets(&self) -> &[T] {
        &self.offsets
    }

    /// Offsets converted to cyclic GHz.
    pub fn offsets_ghz(&self) -> Vec<T> {
        self.offsets.iter().map(|&w| crate::units::rad_ns_to_ghz(w)).collect()
    }

    pub fn intensities(&self) -> &[T] {
        &self.intensities
    }

    pub fn mode(&self) -> SpectrumMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub(crate) fn push_warning(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }

    pub fn uniform_step(&self) -> Result<T> {
        uniform_step(&self.offsets)
    }

    pub(crate) fn with_intensities(&self, intensities: Vec<T>) -> Self {
        debug_assert_eq!(intensities.len(), self.offsets.len());
        Self {
            offsets: self.offsets.clone(),
            intensities,
            mode: self.mode,
            warnings: self.warnings.clone(),
        }
    }

    /// Trapezoid integral over the offset grid.
    pub fn total_power(&self) -> T {
        trapezoid(&self.offsets, &self.intensities)
    }
}

pub(crate) fn ensure_strictly_increasing<T: Real>(xs: &[T]) -> Result<()> {
    for w in xs.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::BadGrid(format!(
                "grid not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

pub(crate) fn uniform_step<T: Real>(xs: &[T]) -> Result<T> {
    if xs.len() < 2 {
        return Err(Error::BadGrid("need at least two grid points".into()));
    }
    let step = xs[1] - xs[0];
    let tol = T::of(1e-9) * step.abs().max(T::of(1e-30));
    for w in xs.windows(2) {
        if ((w[1] - w[0]) - step).abs() > tol {
            return Err(Error::BadGrid(format!(
                "grid not uniform: step {} vs {}",
                w[1] - w[0],
                step
            )));
        }
    }
    Ok(step)
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    assert!(n >= 2, "linspace needs n >= 2");
    let step = (b - a) / T::of((n - 1) as f64);
    (0..n).map(|i| a + step * T::of(i as f64)).collect()
}

/// Trapezoid rule on an arbitrary increasing grid.
pub fn trapezoid<T: Real>(xs: &[T], ys: &[T]) -> T {
    let half = T::of(0.5);
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) * half)
        .sum()
}

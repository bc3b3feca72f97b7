//! Closed-form correlation functions of the driven emitter: g²(τ), the
//! incoherent first-order coherence, interference visibility, and the
//! phenomenological sideband-cascade cross-correlation.
//!
//! The oscillatory kernels share one evaluator,
//! e^{−ητ}(a cos μτ + b sin(μτ)/μ), written so it stays finite and smooth
//! across the critical-damping point μ² = 0 (hyperbolic continuation for
//! μ² < 0, series expansion in the crossover). That continuation is what the
//! numeric master-equation route reproduces in the over-damped regime, and
//! it keeps fit models differentiable when an optimizer wanders across the
//! boundary.

use crate::bloch::{DriveParams, EmitterParams};
use crate::error::{Error, Result};
use crate::float::Real;
use crate::trace::{CorrelationTrace, TraceKind};
use crate::units::ps_to_ns;

/// e^{−η|τ|} (a cos μτ + b sin(μτ)/μ) for μ² of either sign (τ in ns).
///
/// For μ² < 0 this is the hyperbolic continuation, evaluated in the
/// overflow-free split-exponential form; |μ²| τ² ≲ 1e-4 switches to the
/// common series of both branches.
pub fn damped_oscillation<T: Real>(eta: T, mu_sq: T, a: T, b: T, tau_ns: T) -> T {
    let t = tau_ns.abs();
    let x = mu_sq * t * t;
    if x.abs() < T::of(1e-4) {
        // cos(z) ≈ 1 − z²/2 + z⁴/24, sin(z)/z ≈ 1 − z²/6 + z⁴/120 with z² = μ²t²
        let cosz = T::one() - x * T::of(0.5) + x * x * T::of(1.0 / 24.0);
        let sincz = T::one() - x * T::of(1.0 / 6.0) + x * x * T::of(1.0 / 120.0);
        return (-eta * t).exp() * (a * cosz + b * t * sincz);
    }
    if mu_sq > T::zero() {
        let mu = mu_sq.sqrt();
        (-eta * t).exp() * (a * (mu * t).cos() + (b / mu) * (mu * t).sin())
    } else {
        // a cosh(m t) + (b/m) sinh(m t), m = √(−μ²) < η for physical rates
        let m = (-mu_sq).sqrt();
        let half = T::of(0.5);
        let plus = half * (a + b / m) * (-(eta - m) * t).exp();
        let minus = half * (a - b / m) * (-(eta + m) * t).exp();
        plus + minus
    }
}

/// g²(τ) of the ideal driven emitter in the form
/// 1 − e^{−η|τ|}(cos μ|τ| + (η/μ) sin μ|τ|), valid on either damping branch
/// (τ in ns). g²(0) = 0 exactly, g² → 1 as |τ| → ∞.
pub fn g2_value<T: Real>(eta: T, mu_sq: T, tau_ns: T) -> T {
    T::one() - damped_oscillation(eta, mu_sq, T::one(), eta, tau_ns)
}

/// Closed-form g²(τ) on a delay grid (ps). Errors outside the oscillatory
/// branch μ² > 0; use [`crate::bloch::g2_regression`] or [`g2_value`] there.
pub fn g2_closed<T: Real>(
    emitter: &EmitterParams<T>,
    drive: &DriveParams<T>,
    taus_ps: &[T],
) -> Result<CorrelationTrace<T>> {
    let mu_sq = emitter.mu_sq(drive);
    if mu_sq <= T::zero() {
        return Err(Error::UnderdampedDomain { mu_sq: mu_sq.to_f64_lossy() });
    }
    let eta = emitter.eta();
    let values: Vec<T> = taus_ps
        .iter()
        .map(|&tp| g2_value(eta, mu_sq, ps_to_ns(tp)))
        .collect();
    CorrelationTrace::new(taus_ps.to_vec(), values, TraceKind::G2)
}

/// Scale of the incoherent coherence: Ω² / 2(Ω² + Γ₁Γ₂). Vanishes with the
/// drive; equals the steady-state excited population.
pub fn g1_incoh_prefactor<T: Real>(emitter: &EmitterParams<T>, drive: &DriveParams<T>) -> T {
    let om2 = drive.rabi() * drive.rabi();
    let gg = emitter.gamma1() * emitter.gamma2();
    om2 / (T::of(2.0) * (om2 + gg))
}

/// Unnormalized incoherent g¹(τ) (τ in ns), the three-term damped form
///
///   Ω²/2(Ω²+Γ₁Γ₂) [ ½ e^{−Γ₂τ}
///     + e^{−ητ} ( ½ (Ω²+Γ₁Γ₂−Γ₁²)/(Ω²+Γ₁Γ₂) cos μτ
///                 − ¼μ (Ω²(Γ₂−3Γ₁)+Γ₁(Γ₂−Γ₁)²)/(Ω²+Γ₁Γ₂) sin μτ ) ].
pub fn g1_incoh_value<T: Real>(
    emitter: &EmitterParams<T>,
    drive: &DriveParams<T>,
    tau_ns: T,
) -> T {
    let (g1, g2) = (emitter.gamma1(), emitter.gamma2());
    let om2 = drive.rabi() * drive.rabi();
    let d = om2 + g1 * g2;
    let pre = om2 / (T::of(2.0) * d);
    let half = T::of(0.5);
    let a = half * (om2 + g1 * g2 - g1 * g1) / d;
    // sin coefficient written as b·sin(μτ)/μ
    let b = -T::of(0.25) * (om2 * (g2 - T::of(3.0) * g1) + g1 * (g2 - g1) * (g2 - g1)) / d;
    let t = tau_ns.abs();
    pre * (half * (-g2 * t).exp() + damped_oscillation(emitter.eta(), emitter.mu_sq(drive), a, b, t))
}

/// Closed-form incoherent g¹ on a delay grid (ps), normalized to its τ = 0
/// value. Errors outside the oscillatory branch.
pub fn g1_incoh_closed<T: Real>(
    emitter: &EmitterParams<T>,
    drive: &DriveParams<T>,
    taus_ps: &[T],
) -> Result<CorrelationTrace<T>> {
    let mu_sq = emitter.mu_sq(drive);
    if mu_sq <= T::zero() {
        return Err(Error::UnderdampedDomain { mu_sq: mu_sq.to_f64_lossy() });
    }
    let at0 = g1_incoh_value(emitter, drive, T::zero());
    if at0 <= T::zero() {
        return Err(Error::invalid("drive", "no incoherent scattering without drive"));
    }
    let values: Vec<T> = taus_ps
        .iter()
        .map(|&tp| g1_incoh_value(emitter, drive, ps_to_ns(tp)) / at0)
        .collect();
    CorrelationTrace::new(taus_ps.to_vec(), values, TraceKind::G1Incoh)
}

/// First-order interference visibility model: a slow laser-coherence decay
/// plus the fast incoherent emitter coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityModel<T: Real> {
    /// Fraction of the detected field that is coherently scattered laser
    /// light, in [0, 1].
    pub coherent_fraction: T,
    /// Laser coherence time in ns (CW lasers: microseconds, so effectively a
    /// plateau over emitter timescales).
    pub laser_coherence_time_ns: T,
    pub emitter: EmitterParams<T>,
    pub drive: DriveParams<T>,
}

impl<T: Real> VisibilityModel<T> {
    pub fn new(
        coherent_fraction: T,
        laser_coherence_time_ns: T,
        emitter: EmitterParams<T>,
        drive: DriveParams<T>,
    ) -> Result<Self> {
        if !(coherent_fraction >= T::zero() && coherent_fraction <= T::one()) {
            return Err(Error::invalid(
                "coherent_fraction",
                format!("must be in [0,1], got {coherent_fraction}"),
            ));
        }
        if !(laser_coherence_time_ns > T::zero()) {
            return Err(Error::invalid("laser_coherence_time_ns", "must be > 0"));
        }
        Ok(Self { coherent_fraction, laser_coherence_time_ns, emitter, drive })
    }

    /// V(τ) at a single delay (ns).
    pub fn value(&self, tau_ns: T) -> T {
        let t = tau_ns.abs();
        let coh = self.coherent_fraction * (-t / self.laser_coherence_time_ns).exp();
        let at0 = g1_incoh_value(&self.emitter, &self.drive, T::zero());
        let incoh = if at0 > T::zero() {
            g1_incoh_value(&self.emitter, &self.drive, t) / at0
        } else {
            T::zero()
        };
        coh + (T::one() - self.coherent_fraction) * incoh
    }
}

/// Interference visibility V(τ) on a delay grid (ps): V(0) = 1, decaying
/// with the emitter coherence (fast) and the laser coherence (slow).
pub fn visibility<T: Real>(
    model: &VisibilityModel<T>,
    delays_ps: &[T],
) -> Result<CorrelationTrace<T>> {
    let mu_sq = model.emitter.mu_sq(&model.drive);
    if mu_sq <= T::zero() && model.coherent_fraction < T::one() {
        return Err(Error::UnderdampedDomain { mu_sq: mu_sq.to_f64_lossy() });
    }
    let values: Vec<T> = delays_ps.iter().map(|&tp| model.value(ps_to_ns(tp))).collect();
    CorrelationTrace::new(delays_ps.to_vec(), values, TraceKind::Visibility)
}

/// Which sideband photon heralds the other in the detuned cascade.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CascadeOrder {
    /// Lower-sideband (three-photon line) detection heralds an upper-sideband
    /// (fluorescence line) photon: bunching peak at τ > 0. Blue detuning.
    THeraldsF,
    /// The reversed order: bunching peak at τ < 0. Red detuning.
    FHeraldsT,
}

/// Two-exponential asymmetric bunching model for the sideband
/// cross-correlation.
///
/// On the heralded side the trace rises with `tau_rise` and returns to
/// baseline with `tau_fall`; on the opposite side the roles of the two time
/// constants are exchanged, which keeps the curve continuous at τ = 0 and
/// puts the maximum on the heralded side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeModel<T: Real> {
    pub tau_rise_ps: T,
    pub tau_fall_ps: T,
    pub amplitude: T,
    pub baseline: T,
    pub order: CascadeOrder,
}

impl<T: Real> CascadeModel<T> {
    pub fn new(tau_rise_ps: T, tau_fall_ps: T, amplitude: T, order: CascadeOrder) -> Result<Self> {
        if !(tau_rise_ps > T::zero()) {
            return Err(Error::invalid("tau_rise_ps", "must be > 0"));
        }
        if !(tau_fall_ps > T::zero()) {
            return Err(Error::invalid("tau_fall_ps", "must be > 0"));
        }
        if !(amplitude > T::zero()) {
            return Err(Error::invalid("amplitude", "must be > 0"));
        }
        Ok(Self { tau_rise_ps, tau_fall_ps, amplitude, baseline: T::one(), order })
    }

    /// g(τ) at a single delay (ps).
    pub fn value(&self, tau_ps: T) -> T {
        let heralded_side = match self.order {
            CascadeOrder::THeraldsF => tau_ps >= T::zero(),
            CascadeOrder::FHeraldsT => tau_ps <= T::zero(),
        };
        let t = tau_ps.abs();
        let (rise, fall) = if heralded_side {
            (self.tau_rise_ps, self.tau_fall_ps)
        } else {
            (self.tau_fall_ps, self.tau_rise_ps)
        };
        self.baseline + self.amplitude * (T::one() - (-t / rise).exp()) * (-t / fall).exp()
    }

    /// Delay of the maximum on the heralded side (ps, signed).
    pub fn peak_delay_ps(&self) -> T {
        let t = self.tau_rise_ps * (T::one() + self.tau_fall_ps / self.tau_rise_ps).ln();
        match self.order {
            CascadeOrder::THeraldsF => t,
            CascadeOrder::FHeraldsT => -t,
        }
    }
}

/// Evaluate the cascade cross-correlation model on a delay grid (ps).
pub fn cascade_cross_correlation<T: Real>(
    model: &CascadeModel<T>,
    taus_ps: &[T],
) -> Result<CorrelationTrace<T>> {
    let values: Vec<T> = taus_ps.iter().map(|&t| model.value(t)).collect();
    CorrelationTrace::new(taus_ps.to_vec(), values, TraceKind::Cross)
}

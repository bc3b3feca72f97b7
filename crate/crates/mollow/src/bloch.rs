//! Optical Bloch equations of a driven, damped two-level emitter, and the
//! numeric correlation functions built on top of them.
//!
//! The master equation (frame rotating at the laser, basis |e⟩,|g⟩)
//!
//! ```text
//! ρ̇ = -i[H, ρ] + Γ₁ D[σ₋]ρ + (γφ/2) D[σz]ρ,
//! H = -Δ σ₊σ₋ + (Ω/2)(σ₊ + σ₋),
//! ```
//!
//! with Γ₁ = 1/T₁, total coherence decay Γ₂ = 1/T₂ = Γ₁/2 + γφ, and laser
//! detuning Δ = ω_laser − ω_emitter, is equivalent to the real Bloch system
//!
//!   u̇ = -Δ v − Γ₂ u
//!   v̇ =  Δ u + Ω w − Γ₂ v
//!   ẇ = -Ω v − Γ₁ (1 + w)
//!
//! for u = 2 Re ρ_eg, v = 2 Im ρ_eg, w = ρ_ee − ρ_gg.
//!
//! Two-time correlations follow from the quantum regression theorem: the
//! operator X(τ) obeying the same linear Liouvillian with initial condition
//! X(0) = σ₋ ρ_ss gives ⟨σ₊(τ)σ₋(0)⟩ = X_ge(τ), and the excited population
//! re-grown from the ground state gives g²(τ). These numeric routes make no
//! use of the closed-form expressions elsewhere in the crate, so the two can
//! be checked against each other.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::float::Real;
use crate::ode::{integrate_to_grid, OdeTol};
use crate::trace::{
    ensure_strictly_increasing, linspace, CorrelationTrace, SpectrumTrace, SpectrumMode, TraceKind,
};
use crate::units::{ghz_to_rad_ns, ns_to_ps, ps_to_ns};

/// Radiative lifetime T₁ and coherence time T₂ of the emitter.
///
/// Stored internally in nanoseconds; constructed from picoseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterParams<T: Real> {
    t1_ns: T,
    t2_ns: T,
}

impl<T: Real> EmitterParams<T> {
    /// Build from lifetimes in picoseconds. Requires `t1 > 0`, `t2 > 0` and
    /// `t2 <= 2 t1` (the pure-dephasing rate γφ = 1/T₂ − 1/(2T₁) must be
    /// non-negative).
    pub fn from_ps(t1_ps: T, t2_ps: T) -> Result<Self> {
        if !(t1_ps > T::zero()) || !t1_ps.is_finite() {
            return Err(Error::invalid("t1_ps", format!("must be > 0, got {t1_ps}")));
        }
        if !(t2_ps > T::zero()) || !t2_ps.is_finite() {
            return Err(Error::invalid("t2_ps", format!("must be > 0, got {t2_ps}")));
        }
        let two = T::of(2.0);
        // allow equality up to rounding
        if t2_ps > two * t1_ps * (T::one() + T::of(1e-12)) {
            return Err(Error::invalid(
                "t2_ps",
                format!("coherence time {t2_ps} exceeds the radiative bound 2*t1 = {}", two * t1_ps),
            ));
        }
        Ok(Self { t1_ns: ps_to_ns(t1_ps), t2_ns: ps_to_ns(t2_ps) })
    }

    pub fn t1_ns(&self) -> T {
        self.t1_ns
    }

    pub fn t2_ns(&self) -> T {
        self.t2_ns
    }

    pub fn t1_ps(&self) -> T {
        ns_to_ps(self.t1_ns)
    }

    pub fn t2_ps(&self) -> T {
        ns_to_ps(self.t2_ns)
    }

    /// Population decay rate Γ₁ = 1/T₁ (1/ns).
    pub fn gamma1(&self) -> T {
        self.t1_ns.recip()
    }

    /// Total coherence decay rate Γ₂ = 1/T₂ (1/ns).
    pub fn gamma2(&self) -> T {
        self.t2_ns.recip()
    }

    /// Pure dephasing rate γφ = Γ₂ − Γ₁/2 (clamped at zero against rounding).
    pub fn gamma_phi(&self) -> T {
        (self.gamma2() - self.gamma1() * T::of(0.5)).max(T::zero())
    }

    /// Sideband decay rate η = (Γ₁ + Γ₂)/2 (1/ns).
    pub fn eta(&self) -> T {
        (self.gamma1() + self.gamma2()) * T::of(0.5)
    }

    /// μ² = Ω² − ((Γ₁ − Γ₂)/2)²; the oscillatory branch has μ² > 0.
    pub fn mu_sq(&self, drive: &DriveParams<T>) -> T {
        let half_diff = (self.gamma1() - self.gamma2()) * T::of(0.5);
        drive.rabi() * drive.rabi() - half_diff * half_diff
    }
}

/// Coherent drive: Rabi frequency Ω and laser detuning Δ (angular, rad/ns).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams<T: Real> {
    rabi_rad_ns: T,
    detuning_rad_ns: T,
}

impl<T: Real> DriveParams<T> {
    /// Build from cyclic frequencies in GHz. Requires `rabi >= 0`.
    pub fn from_ghz(rabi_ghz: T, detuning_ghz: T) -> Result<Self> {
        if !(rabi_ghz >= T::zero()) || !rabi_ghz.is_finite() {
            return Err(Error::invalid("rabi_ghz", format!("must be >= 0, got {rabi_ghz}")));
        }
        if !detuning_ghz.is_finite() {
            return Err(Error::invalid("detuning_ghz", "must be finite"));
        }
        Ok(Self {
            rabi_rad_ns: ghz_to_rad_ns(rabi_ghz),
            detuning_rad_ns: ghz_to_rad_ns(detuning_ghz),
        })
    }

    /// Resonant drive at the given Rabi frequency.
    pub fn resonant_ghz(rabi_ghz: T) -> Result<Self> {
        Self::from_ghz(rabi_ghz, T::zero())
    }

    /// Ω in rad/ns.
    pub fn rabi(&self) -> T {
        self.rabi_rad_ns
    }

    /// Δ in rad/ns.
    pub fn detuning(&self) -> T {
        self.detuning_rad_ns
    }

    pub fn rabi_ghz(&self) -> T {
        crate::units::rad_ns_to_ghz(self.rabi_rad_ns)
    }

    pub fn detuning_ghz(&self) -> T {
        crate::units::rad_ns_to_ghz(self.detuning_rad_ns)
    }
}

/// Bloch vector (u, v, w); w = −1 is the ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState<T: Real> {
    pub u: T,
    pub v: T,
    pub w: T,
}

impl<T: Real> BlochState<T> {
    pub fn ground() -> Self {
        Self { u: T::zero(), v: T::zero(), w: -T::one() }
    }

    pub fn excited() -> Self {
        Self { u: T::zero(), v: T::zero(), w: T::one() }
    }

    /// ρ_ee = (1 + w)/2.
    pub fn excited_population(&self) -> T {
        (T::one() + self.w) * T::of(0.5)
    }

    /// u² + v² + w² (≤ 1 for physical states).
    pub fn norm_sq(&self) -> T {
        self.u * self.u + self.v * self.v + self.w * self.w
    }
}

fn bloch_rhs<T: Real>(em: &EmitterParams<T>, dr: &DriveParams<T>, s: &[T; 3]) -> [T; 3] {
    let (g1, g2) = (em.gamma1(), em.gamma2());
    let (om, det) = (dr.rabi(), dr.detuning());
    let (u, v, w) = (s[0], s[1], s[2]);
    [
        -det * v - g2 * u,
        det * u + om * w - g2 * v,
        -om * v - g1 * (T::one() + w),
    ]
}

/// Fixed point of the Bloch equations and the steady-state excited population.
///
/// Closed form: with D = 1 + Δ²T₂² + Ω²T₁T₂,
/// ρ_ee = Ω²T₁T₂ / (2D), u = ΔΩT₂²/D, v = −ΩT₂/D.
pub fn steady_state<T: Real>(
    emitter: &EmitterParams<T>,
    drive: &DriveParams<T>,
) -> (BlochState<T>, T) {
    let (t1, t2) = (emitter.t1_ns(), emitter.t2_ns());
    let (om, det) = (drive.rabi(), drive.detuning());
    let denom = T::one() + det * det * t2 * t2 + om * om * t1 * t2;
    let p_e = om * om * t1 * t2 / (T::of(2.0) * denom);
    let state = BlochState {
        u: det * om * t2 * t2 / denom,
        v: -om * t2 / denom,
        w: T::of(2.0) * p_e - T::one(),
    };
    (state, p_e)
}

/// Integrate the Bloch equations from `initial` over `t_grid_ps` (strictly
/// increasing, starting at 0). Returns the state at every grid point.
pub fn evolve<T: Real>(
    emitter: &EmitterParams<T>,
    drive: &DriveParams<T>,
    initial: BlochState<T>,
    t_grid_ps: &[T],
) -> Result<Vec<BlochState<T>>> {
    evolve_with_tol(emitter, drive, initial, t_grid_ps, OdeTol::default())
}

pub fn evolve_with_tol<T: Real>(
    emitter: &EmitterParams<T>,
    drive: &DriveParams<T>,
    initial: BlochState<T>,
    t_grid_ps: &[T],
    tol: OdeTol<T>,
) -> Result<Vec<BlochState<T>>> {
    if t_grid_ps.is_empty() {
        return Err(Error::BadGrid("empty time grid".into()));
    }
    ensure_strictly_increasing(t_grid_ps)?;
    if t_grid_ps[0] != T::zero() {
        return Err(Error::BadGrid(format!("time grid must start at 0, got {}", t_grid_ps[0])));
    }
    let grid_ns: Vec<T> = t_grid_ps.iter().map(|&t| ps_to_ns(t)).collect();
    let sol = integrate_to_grid(
        |_, y: &[T; 3]| bloch_rhs(emitter, drive, y),
        [initial.u, initial.v, initial.w],
        &grid_ns,
        tol,
    )?;
    Ok(sol.into_iter().map(|y| BlochState { u: y[0], v: y[1], w: y[2] }).collect())
}

/// g²(τ) from the regression theorem: the excited population re-grown from
/// the post-emission ground state, normalized by its steady-state value.
/// g²(0) = 0 exactly and g²(∞) → 1.
pub fn g2_regression<T: Real>(
    emitter: &EmitterParams<T>,
    drive: &DriveParams<T>,
    t_grid_ps: &[T],
) -> Result<CorrelationTrace<T>> {
    let (_, p_inf) = steady_state(emitter, drive);
    let states = evolve(emitter, drive, BlochState::ground(), t_grid_ps)?;
    if p_inf <= T::zero() {
        // undriven emitter never re-excites; define the trace as zero
        let zeros = vec![T::zero(); t_grid_ps.len()];
        return CorrelationTrace::new(t_grid_ps.to_vec(), zeros, TraceKind::G2);
    }
    let values: Vec<T> = states.iter().map(|s| s.excited_population() / p_inf).collect();
    CorrelationTrace::new(t_grid_ps.to_vec(), values, TraceKind::G2)
}

// Operator-space regression: X evolves under the same Liouvillian as ρ but
// from a non-Hermitian initial condition. Component order [Xee, Xeg, Xge, Xgg].
fn liouville_rhs<T: Real>(
    em: &EmitterParams<T>,
    dr: &DriveParams<T>,
    x: &[Complex<T>; 4],
) -> [Complex<T>; 4] {
    let i = Complex::new(T::zero(), T::one());
    let half_om = Complex::new(dr.rabi() * T::of(0.5), T::zero());
    let det = dr.detuning();
    let g1 = em.gamma1();
    let g2 = em.gamma2();
    let (ee, eg, ge, gg) = (x[0], x[1], x[2], x[3]);
    [
        -i * half_om * (ge - eg) - ee * g1,
        i * eg * det - i * half_om * (gg - ee) - eg * g2,
        -i * ge * det - i * half_om * (ee - gg) - ge * g2,
        -i * half_om * (eg - ge) + ee * g1,
    ]
}

fn complex4_to_flat<T: Real>(x: &[Complex<T>; 4]) -> [T; 8] {
    let mut f = [T::zero(); 8];
    for k in 0..4 {
        f[2 * k] = x[k].re;
        f[2 * k + 1] = x[k].im;
    }
    f
}

fn flat_to_complex4<T: Real>(f: &[T; 8]) -> [Complex<T>; 4] {
    [
        Complex::new(f[0], f[1]),
        Complex::new(f[2], f[3]),
        Complex::new(f[4], f[5]),
        Complex::new(f[6], f[7]),
    ]
}

/// ⟨σ₊(τ)σ₋(0)⟩ − ⟨σ₊⟩⟨σ₋⟩ on a grid of τ (ns), via the regression theorem.
/// Returns complex values; real and even in τ on resonance.
fn g1_incoh_complex<T: Real>(
    emitter: &EmitterParams<T>,
    drive: &DriveParams<T>,
    taus_ns: &[T],
) -> Result<Vec<Complex<T>>> {
    let (ss, p_e) = steady_state(emitter, drive);
    let half = T::of(0.5);
    // ρ_eg = (u + i v)/2, ρ_ge = (u − i v)/2
    let rho_eg = Complex::new(ss.u * half, ss.v * half);
    let rho_ge = rho_eg.conj();
    // X(0) = σ₋ ρ_ss  ->  [0, 0, ρ_ee, ρ_eg]
    let x0 = [
        Complex::new(T::zero(), T::zero()),
        Complex::new(T::zero(), T::zero()),
        Complex::new(p_e, T::zero()),
        rho_eg,
    ];
    let plateau = rho_ge * rho_eg; // ⟨σ₊⟩⟨σ₋⟩
    let sol = integrate_to_grid(
        |_, y: &[T; 8]| {
            let x = flat_to_complex4(y);
            complex4_to_flat(&liouville_rhs(emitter, drive, &x))
        },
        complex4_to_flat(&x0),
        taus_ns,
        OdeTol::default(),
    )?;
    Ok(sol
        .iter()
        .map(|y| Complex::new(y[4], y[5]) - plateau) // X_ge − plateau
        .collect())
}

/// Incoherent first-order coherence from the regression theorem, normalized
/// to its τ = 0 value. On resonance g¹_incoh is real and the trace is the
/// signed value itself; off resonance the trace reduces the complex
/// coherence to its magnitude carrying the sign of the real part.
///
/// For zero drive there is no incoherent scattering and the trace is
/// identically zero.
pub fn g1_incoh_regression<T: Real>(
    emitter: &EmitterParams<T>,
    drive: &DriveParams<T>,
    t_grid_ps: &[T],
) -> Result<CorrelationTrace<T>> {
    if t_grid_ps.is_empty() {
        return Err(Error::BadGrid("empty time grid".into()));
    }
    ensure_strictly_increasing(t_grid_ps)?;
    if t_grid_ps[0] != T::zero() {
        return Err(Error::BadGrid(format!("time grid must start at 0, got {}", t_grid_ps[0])));
    }
    if drive.rabi() == T::zero() {
        let zeros = vec![T::zero(); t_grid_ps.len()];
        return CorrelationTrace::new(t_grid_ps.to_vec(), zeros, TraceKind::G1Incoh);
    }
    let taus_ns: Vec<T> = t_grid_ps.iter().map(|&t| ps_to_ns(t)).collect();
    let g1 = g1_incoh_complex(emitter, drive, &taus_ns)?;
    let norm = g1[0].norm();
    let values: Vec<T> = if norm > T::zero() {
        g1.iter().map(|c| c.norm() / norm * sign_of(c.re)).collect()
    } else {
        vec![T::zero(); g1.len()]
    };
    CorrelationTrace::new(t_grid_ps.to_vec(), values, TraceKind::G1Incoh)
}

fn sign_of<T: Real>(x: T) -> T {
    if x < T::zero() {
        -T::one()
    } else {
        T::one()
    }
}

/// Options for the numeric emission spectrum.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions<T: Real> {
    /// Span of the internal τ grid in units of 1/min(Γ₁, Γ₂); the coherence
    /// must have fully decayed for the transform to converge.
    pub tau_span_factor: T,
    /// Minimum number of τ samples.
    pub min_samples: usize,
}

impl<T: Real> Default for SpectrumOptions<T> {
    fn default() -> Self {
        Self { tau_span_factor: T::of(25.0), min_samples: 4096 }
    }
}

/// Incoherent emission spectrum on `offsets_rad_ns` (angular offsets from the
/// bare emitter resonance), computed as the one-sided Fourier transform of
/// the regression-theorem g¹_incoh:
///
///   S(Δω) = (1/π) Re ∫₀^∞ g¹_incoh(τ) e^{−i(Δω−Δ)τ} dτ.
///
/// The offset grid must be symmetric about zero; if its spacing is too
/// coarse to resolve the Γ₂ central linewidth a warning is recorded on the
/// returned trace.
pub fn spectrum_regression<T: Real>(
    emitter: &EmitterParams<T>,
    drive: &DriveParams<T>,
    offsets_rad_ns: &[T],
) -> Result<SpectrumTrace<T>> {
    spectrum_regression_with(emitter, drive, offsets_rad_ns, SpectrumOptions::default())
}

pub fn spectrum_regression_with<T: Real>(
    emitter: &EmitterParams<T>,
    drive: &DriveParams<T>,
    offsets_rad_ns: &[T],
    opt: SpectrumOptions<T>,
) -> Result<SpectrumTrace<T>> {
    ensure_strictly_increasing(offsets_rad_ns)?;
    let n = offsets_rad_ns.len();
    if n < 3 {
        return Err(Error::BadGrid("offset grid needs at least 3 points".into()));
    }
    let span_tol = T::of(1e-6) * (offsets_rad_ns[n - 1] - offsets_rad_ns[0]).abs();
    for i in 0..n {
        if (offsets_rad_ns[i] + offsets_rad_ns[n - 1 - i]).abs() > span_tol {
            return Err(Error::BadGrid("offset grid must be symmetric about 0".into()));
        }
    }

    let slow = emitter.gamma1().min(emitter.gamma2());
    let tau_max = opt.tau_span_factor / slow;
    // resolve the fastest oscillation present in g1: μ-ish, detuning, Ω
    let fastest = drive
        .rabi()
        .max(drive.detuning().abs())
        .max(emitter.eta())
        .max(T::one());
    let dt_needed = T::of(0.1) / fastest;
    let samples = ((tau_max / dt_needed).to_f64_lossy().ceil() as usize)
        .clamp(opt.min_samples, 400_000);
    let taus_ns = linspace(T::zero(), tau_max, samples + 1);

    let mut trace = if drive.rabi() == T::zero() {
        SpectrumTrace::new(
            offsets_rad_ns.to_vec(),
            vec![T::zero(); n],
            SpectrumMode::Numeric,
        )?
    } else {
        let g1 = g1_incoh_complex(emitter, drive, &taus_ns)?;
        let dt = taus_ns[1] - taus_ns[0];
        let inv_pi = T::of(std::f64::consts::FRAC_1_PI);
        let det = drive.detuning();
        let intensities: Vec<T> = offsets_rad_ns
            .iter()
            .map(|&w| {
                let delta = w - det; // laser-frame offset
                // trapezoid of Re[g1(τ) e^{−iδτ}] via phase recurrence
                let rot = Complex::from_polar(T::one(), -delta * dt);
                let mut phase = Complex::new(T::one(), T::zero());
                let mut acc = T::zero();
                let half = T::of(0.5);
                for (k, g) in g1.iter().enumerate() {
                    let term = (*g * phase).re;
                    let weight = if k == 0 || k == samples { half } else { T::one() };
                    acc += term * weight;
                    phase *= rot;
                }
                acc * dt * inv_pi
            })
            .collect();
        SpectrumTrace::new(offsets_rad_ns.to_vec(), intensities, SpectrumMode::Numeric)?
    };

    let spacing = offsets_rad_ns[1] - offsets_rad_ns[0];
    if spacing > emitter.gamma2() {
        trace.push_warning(format!(
            "offset spacing {} rad/ns exceeds the central linewidth 1/T2 = {} rad/ns",
            spacing,
            emitter.gamma2()
        ));
    }
    Ok(trace)
}

//! Waiting-time quantum-jump unraveling of the driven two-level emitter.
//!
//! Between jumps the unnormalized state follows the non-Hermitian generator
//! K = H − (i/2)Γ₁|e⟩⟨e|, known in closed form from the eigendecomposition
//! of the 2×2 matrix, so no time stepping is involved anywhere.
//!
//! The two decay channels factorize exactly: the dephasing hazard γφ/2 is
//! state-independent, so its jump times form an independent exponential
//! clock, while the photon channel fires when the photon-only survival
//! S(t) = ‖e^{−iKt}ψ‖² crosses a uniform draw. Whichever clock fires first
//! wins (competing risks with a constant hazard on one side — identical
//! statistics to the joint waiting time with proportional channel choice).
//!
//! Photon jumps reset the state to |g⟩, which therefore starts almost every
//! waiting-time draw; its survival curve is tabulated once and inverted by
//! binary search. Draws from post-dephasing states (a γφ/(γφ+2Γ₁p_e)
//! minority) use safeguarded Newton on the closed-form survival.

use num_complex::Complex64 as C64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::PhotonStream;
use crate::bloch::{DriveParams, EmitterParams};
use crate::error::{Error, Result};
use crate::instrument::BlinkingModel;
use rand_distr::{Distribution, Exp};

const GROUND: [C64; 2] = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];

/// Exact propagator for the 2×2 non-Hermitian generator (photon channel
/// damping only; the dephasing scalar is handled as a separate clock).
struct Propagator {
    lam_plus: C64,
    lam_minus: C64,
    p_plus: [[C64; 2]; 2],
    p_minus: [[C64; 2]; 2],
    degenerate: bool,
    k: [[C64; 2]; 2],
    gamma1: f64,
}

impl Propagator {
    fn new(emitter: &EmitterParams<f64>, drive: &DriveParams<f64>) -> Self {
        let g1 = emitter.gamma1();
        let det = drive.detuning();
        let half_om = drive.rabi() / 2.0;
        let k = [
            [C64::new(-det, -g1 / 2.0), C64::new(half_om, 0.0)],
            [C64::new(half_om, 0.0), C64::new(0.0, 0.0)],
        ];
        let tr = k[0][0] + k[1][1];
        let det_k = k[0][0] * k[1][1] - k[0][1] * k[1][0];
        let disc = (tr * tr - 4.0 * det_k).sqrt();
        let lam_plus = (tr + disc) / 2.0;
        let lam_minus = (tr - disc) / 2.0;
        let gap = lam_plus - lam_minus;
        let scale = lam_plus.norm().max(lam_minus.norm()).max(1.0);
        let degenerate = gap.norm() < 1e-9 * scale;
        let (p_plus, p_minus) = if degenerate {
            ([[C64::new(0.0, 0.0); 2]; 2], [[C64::new(0.0, 0.0); 2]; 2])
        } else {
            let mut pp = [[C64::new(0.0, 0.0); 2]; 2];
            let mut pm = [[C64::new(0.0, 0.0); 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    let id = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                    pp[r][c] = (k[r][c] - lam_minus * id) / gap;
                    pm[r][c] = (k[r][c] - lam_plus * id) / (-gap);
                }
            }
            (pp, pm)
        };
        Self { lam_plus, lam_minus, p_plus, p_minus, degenerate, k, gamma1: g1 }
    }

    /// ψ(t) = e^{−iKt} ψ(0).
    fn apply(&self, psi: &[C64; 2], t: f64) -> [C64; 2] {
        let i = C64::new(0.0, 1.0);
        if self.degenerate {
            let lam = (self.lam_plus + self.lam_minus) / 2.0;
            let phase = (-i * lam * t).exp();
            let mut out = [C64::new(0.0, 0.0); 2];
            for r in 0..2 {
                let kpsi = self.k[r][0] * psi[0] + self.k[r][1] * psi[1] - lam * psi[r];
                out[r] = phase * (psi[r] - i * t * kpsi);
            }
            return out;
        }
        let ep = (-i * self.lam_plus * t).exp();
        let em = (-i * self.lam_minus * t).exp();
        let mut out = [C64::new(0.0, 0.0); 2];
        for r in 0..2 {
            let plus = self.p_plus[r][0] * psi[0] + self.p_plus[r][1] * psi[1];
            let minus = self.p_minus[r][0] * psi[0] + self.p_minus[r][1] * psi[1];
            out[r] = ep * plus + em * minus;
        }
        out
    }

    /// Photon-channel survival ‖e^{−iKt}ψ‖² and its time derivative
    /// −Γ₁|c_e(t)|² for a normalized ψ.
    fn survival_and_slope(&self, psi: &[C64; 2], t: f64) -> (f64, f64) {
        let evolved = self.apply(psi, t);
        let s = evolved[0].norm_sqr() + evolved[1].norm_sqr();
        (s, -self.gamma1 * evolved[0].norm_sqr())
    }

    fn survival(&self, psi: &[C64; 2], t: f64) -> f64 {
        let evolved = self.apply(psi, t);
        evolved[0].norm_sqr() + evolved[1].norm_sqr()
    }
}

/// Tabulated ground-state survival, inverted by binary search with linear
/// interpolation. Covers S down to ~1e-12; smaller draws (once per ~1e12
/// jumps) fall back to the generic root-find.
struct GroundTable {
    dt: f64,
    s: Vec<f64>,
}

impl GroundTable {
    fn build(prop: &Propagator, emitter: &EmitterParams<f64>) -> Option<Self> {
        // effective emission rate from the ground state sets the span
        let t1 = emitter.t1_ns();
        let mut t_cap = 10.0 * t1;
        while prop.survival(&GROUND, t_cap) > 1e-12 {
            t_cap *= 2.0;
            if t_cap > 1e9 {
                return None; // effectively no emission (zero or tiny drive)
            }
        }
        let n = 1 << 16;
        let dt = t_cap / n as f64;
        let s: Vec<f64> = (0..=n).map(|k| prop.survival(&GROUND, k as f64 * dt)).collect();
        Some(Self { dt, s })
    }

    /// Smallest t with S(t) <= r, or None when r is below the table floor.
    fn invert(&self, r: f64) -> Option<f64> {
        if r <= *self.s.last().unwrap() {
            return None;
        }
        // S is non-increasing: binary search for the crossing interval
        let (mut lo, mut hi) = (0usize, self.s.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.s[mid] > r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (s0, s1) = (self.s[lo], self.s[hi]);
        let frac = if s0 > s1 { (s0 - r) / (s0 - s1) } else { 0.5 };
        Some((lo as f64 + frac) * self.dt)
    }
}

/// Safeguarded Newton for S(t) = r from an arbitrary normalized state.
fn invert_survival(prop: &Propagator, psi: &[C64; 2], r: f64, hint: f64) -> f64 {
    // bracket the crossing first
    let mut hi = hint.max(1e-6);
    let mut lo = 0.0;
    while prop.survival(psi, hi) > r {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return hi;
        }
    }
    // Newton on ln S − ln r with bisection safeguard
    let mut t = 0.5 * (lo + hi);
    for _ in 0..60 {
        let (s, slope) = prop.survival_and_slope(psi, t);
        if s > r {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo < 5e-5 {
            break;
        }
        let step = (s.ln() - r.ln()) * s / slope; // f/f' with f = ln S − ln r
        let t_new = t - step;
        t = if t_new > lo && t_new < hi { t_new } else { 0.5 * (lo + hi) };
    }
    0.5 * (lo + hi)
}

/// Generate a detected photon stream of the given duration (ps).
///
/// `efficiency` thins the emitted photons into detected tags; the jump
/// statistics themselves are exact. Deterministic for a fixed seed. The
/// emitter starts in the ground state; the ~T₁ initial transient is
/// negligible against the millisecond durations this is meant for.
pub fn simulate_stream(
    emitter: &EmitterParams<f64>,
    drive: &DriveParams<f64>,
    duration_ps: u64,
    efficiency: f64,
    seed: u64,
) -> Result<PhotonStream> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::invalid("efficiency", "must be in (0,1]"));
    }
    if duration_ps == 0 {
        return Err(Error::invalid("duration_ps", "must be > 0"));
    }
    let duration_ns = duration_ps as f64 * 1e-3;
    let prop = Propagator::new(emitter, drive);
    let gphi = emitter.gamma_phi();
    let table = GroundTable::build(&prop, emitter);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deph = if gphi > 0.0 { Some(Exp::new(gphi / 2.0).expect("positive rate")) } else { None };

    let mut tags: Vec<u64> = Vec::new();
    let mut psi = GROUND;
    let mut on_ground = true;
    let mut t_now = 0.0f64; // ns
    let hint = 2.0 * emitter.t1_ns();

    while t_now < duration_ns {
        let r: f64 = loop {
            let u = rng.random::<f64>();
            if u > 0.0 {
                break u;
            }
        };
        let t_photon = if on_ground {
            match &table {
                Some(tab) => match tab.invert(r) {
                    Some(t) => t,
                    None => invert_survival(&prop, &psi, r, hint),
                },
                None => f64::INFINITY, // zero drive: ground state never emits
            }
        } else {
            invert_survival(&prop, &psi, r, hint)
        };
        let t_deph = match &deph {
            Some(exp) => exp.sample(&mut rng),
            None => f64::INFINITY,
        };

        let dt = t_photon.min(t_deph);
        if !dt.is_finite() || t_now + dt >= duration_ns {
            break;
        }
        t_now += dt;

        if t_photon <= t_deph {
            if efficiency >= 1.0 || rng.random::<f64>() < efficiency {
                tags.push((t_now * 1e3).round() as u64);
            }
            psi = GROUND;
            on_ground = true;
        } else {
            // dephasing: evolve to the jump, flip the ground amplitude
            let evolved = prop.apply(&psi, dt);
            let norm = (evolved[0].norm_sqr() + evolved[1].norm_sqr()).sqrt();
            psi = [evolved[0] / norm, -evolved[1] / norm];
            on_ground = false;
        }
    }

    PhotonStream::new(tags, duration_ps, seed)
}

/// Gate a photon stream with a bright/dark telegraph process: tags arriving
/// during dark periods are dropped. The telegraph starts from its stationary
/// distribution and is deterministic for a fixed seed.
pub fn blinking_modulated_stream(
    stream: &PhotonStream,
    blinking: &BlinkingModel<f64>,
    seed: u64,
) -> Result<PhotonStream> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bright = rng.random::<f64>() < blinking.duty_bright();
    let ms_to_ps = 1e9;
    let draw = |bright_now: bool, rng: &mut ChaCha8Rng| -> f64 {
        let rate = if bright_now {
            blinking.rate_on_to_off_per_ms
        } else {
            blinking.rate_off_to_on_per_ms
        };
        Exp::new(rate).expect("positive rate").sample(rng) * ms_to_ps
    };
    let mut t_switch = draw(bright, &mut rng);

    let mut kept = Vec::with_capacity(stream.len());
    for &tag in stream.tags_ps() {
        while (tag as f64) >= t_switch {
            bright = !bright;
            t_switch += draw(bright, &mut rng);
        }
        if bright {
            kept.push(tag);
        }
    }
    PhotonStream::new(kept, stream.duration_ps(), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::steady_state;

    fn reference() -> (EmitterParams<f64>, DriveParams<f64>) {
        (
            EmitterParams::from_ps(56.8, 103.5).unwrap(),
            DriveParams::resonant_ghz(4.0).unwrap(),
        )
    }

    #[test]
    fn zero_drive_gives_empty_stream() {
        let em = EmitterParams::from_ps(56.8, 103.5).unwrap();
        let dr = DriveParams::resonant_ghz(0.0).unwrap();
        let s = simulate_stream(&em, &dr, 1_000_000, 1.0, 1).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn fixed_seed_reproduces_stream() {
        let (em, dr) = reference();
        let a = simulate_stream(&em, &dr, 200_000, 0.5, 42).unwrap();
        let b = simulate_stream(&em, &dr, 200_000, 0.5, 42).unwrap();
        assert_eq!(a.tags_ps(), b.tags_ps());
        let c = simulate_stream(&em, &dr, 200_000, 0.5, 43).unwrap();
        assert_ne!(a.tags_ps(), c.tags_ps());
    }

    #[test]
    fn emission_rate_matches_steady_state() {
        let (em, dr) = reference();
        let duration_ps = 40_000_000u64; // 40 µs
        let s = simulate_stream(&em, &dr, duration_ps, 1.0, 7).unwrap();
        let (_, p_inf) = steady_state(&em, &dr);
        let expected = p_inf / em.t1_ns() * duration_ps as f64 * 1e-3;
        let n = s.len() as f64;
        assert!(
            (n - expected).abs() < 3.0 * expected.sqrt(),
            "n = {n}, expected {expected} ± {}",
            expected.sqrt()
        );
    }

    #[test]
    fn detuned_emission_rate_matches_steady_state() {
        let em = EmitterParams::from_ps(56.8, 103.5).unwrap();
        let dr = DriveParams::from_ghz(4.0, 5.3).unwrap();
        let duration_ps = 40_000_000u64;
        let s = simulate_stream(&em, &dr, duration_ps, 1.0, 19).unwrap();
        let (_, p_inf) = steady_state(&em, &dr);
        let expected = p_inf / em.t1_ns() * duration_ps as f64 * 1e-3;
        let n = s.len() as f64;
        assert!((n - expected).abs() < 3.5 * expected.sqrt(), "n = {n}, expected {expected}");
    }

    #[test]
    fn efficiency_thins_rate_proportionally() {
        let (em, dr) = reference();
        let full = simulate_stream(&em, &dr, 10_000_000, 1.0, 3).unwrap();
        let half = simulate_stream(&em, &dr, 10_000_000, 0.5, 3).unwrap();
        let ratio = half.len() as f64 / full.len() as f64;
        assert!((ratio - 0.5).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn overdamped_drive_still_emits() {
        let em = EmitterParams::from_ps(56.8, 103.5).unwrap();
        let dr = DriveParams::resonant_ghz(0.3).unwrap();
        let s = simulate_stream(&em, &dr, 10_000_000, 1.0, 5).unwrap();
        let (_, p_inf) = steady_state(&em, &dr);
        let expected = p_inf / em.t1_ns() * 10_000.0;
        assert!((s.len() as f64 - expected).abs() < 4.0 * expected.sqrt());
    }

    #[test]
    fn blinking_gate_identity_and_thinning() {
        let (em, dr) = reference();
        let s = simulate_stream(&em, &dr, 2_000_000_000, 0.05, 11).unwrap();

        // effectively always-bright telegraph
        let always = BlinkingModel::new(1e-9, 1e3, 1.0).unwrap();
        let gated = blinking_modulated_stream(&s, &always, 1).unwrap();
        assert_eq!(gated.len(), s.len());

        // duty 0.746 thins the mean rate accordingly; fast switching
        // (59 µs / 20 µs dwells) packs ~50 duty cycles into the 2 ms stream
        // so the telegraph time-average is well converged
        let model = BlinkingModel::<f64>::new(17.0, 49.94, 48.3).unwrap();
        assert!((model.duty_bright() - 0.746).abs() < 1e-3);
        let gated = blinking_modulated_stream(&s, &model, 2).unwrap();
        let expected = s.len() as f64 * model.duty_bright();
        assert!(
            (gated.len() as f64 - expected).abs() < 0.1 * expected,
            "kept {} of {}, expected ~{expected}",
            gated.len(),
            s.len()
        );
    }
}

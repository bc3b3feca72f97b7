//! Everything between the ideal emitter and the detected counts: incident
//! flux calibration, saturation of the count rate, the linear laser
//! background, detector timing response (IRF), filter lineshapes, telegraph
//! blinking, and the efficiency bookkeeping.

use num_complex::Complex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::float::Real;
use crate::trace::{CorrelationTrace, SpectrumTrace};
use crate::units::photon_energy_j;

/// Converts incident optical power to photons per exciton lifetime:
/// n̄ = P·T₁/hν.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxCalibration<T: Real> {
    pub wavelength_nm: T,
    pub t1_ps: T,
}

impl<T: Real> FluxCalibration<T> {
    pub fn new(wavelength_nm: T, t1_ps: T) -> Result<Self> {
        if !(wavelength_nm > T::zero()) {
            return Err(Error::invalid("wavelength_nm", "must be > 0"));
        }
        if !(t1_ps > T::zero()) {
            return Err(Error::invalid("t1_ps", "must be > 0"));
        }
        Ok(Self { wavelength_nm, t1_ps })
    }
}

/// Incident flux n̄ (photons per exciton lifetime) from power in nW.
pub fn flux_from_power<T: Real>(cal: &FluxCalibration<T>, power_nw: T) -> Result<T> {
    if !(power_nw >= T::zero()) {
        return Err(Error::invalid("power_nw", "must be >= 0"));
    }
    let e_photon = photon_energy_j(cal.wavelength_nm.to_f64_lossy());
    let joules_per_t1 = power_nw.to_f64_lossy() * 1e-9 * cal.t1_ps.to_f64_lossy() * 1e-12;
    Ok(T::of(joules_per_t1 / e_photon))
}

/// Detection-chain model: timing response, filter linewidths, residual
/// background reflectivity and overall detection efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstrumentModel<T: Real> {
    /// Detector timing response FWHM applied to correlation traces (ps).
    pub irf_fwhm_ps: T,
    /// Scanning-cavity linewidth used for spectra (MHz).
    pub fp_linewidth_mhz: T,
    /// Grating filter bandwidth used to select one sideband (GHz).
    pub grating_bandwidth_ghz: T,
    /// Residual reflectivity of the bare cavity at resonance (the laser
    /// background floor), in [0, 1].
    pub background_reflectivity: T,
    /// Overall responsivity: detected QD photons per incident photon, (0, 1].
    pub detection_efficiency: T,
}

impl<T: Real> InstrumentModel<T> {
    pub fn new(
        irf_fwhm_ps: T,
        fp_linewidth_mhz: T,
        grating_bandwidth_ghz: T,
        background_reflectivity: T,
        detection_efficiency: T,
    ) -> Result<Self> {
        for (name, v) in [
            ("irf_fwhm_ps", irf_fwhm_ps),
            ("fp_linewidth_mhz", fp_linewidth_mhz),
            ("grating_bandwidth_ghz", grating_bandwidth_ghz),
        ] {
            if !(v >= T::zero()) {
                return Err(Error::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        if !(background_reflectivity >= T::zero() && background_reflectivity <= T::one()) {
            return Err(Error::invalid("background_reflectivity", "must be in [0,1]"));
        }
        if !(detection_efficiency >= T::zero() && detection_efficiency <= T::one()) {
            return Err(Error::invalid("detection_efficiency", "must be in [0,1]"));
        }
        Ok(Self {
            irf_fwhm_ps,
            fp_linewidth_mhz,
            grating_bandwidth_ghz,
            background_reflectivity,
            detection_efficiency,
        })
    }
}

/// Saturation law constants: C(n̄) = η_sys·S_sat·n̄/(n̄+n₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationParams<T: Real> {
    /// Saturated photon rate scattered out of the cavity (GHz).
    pub s_sat_ghz: T,
    /// Saturation incident flux (dimensionless).
    pub n0: T,
    /// System responsivity, (0, 1].
    pub eta_sys: T,
}

impl<T: Real> SaturationParams<T> {
    pub fn new(s_sat_ghz: T, n0: T, eta_sys: T) -> Result<Self> {
        if !(s_sat_ghz > T::zero()) {
            return Err(Error::invalid("s_sat_ghz", "must be > 0"));
        }
        if !(n0 > T::zero()) {
            return Err(Error::invalid("n0", "must be > 0"));
        }
        if !(eta_sys > T::zero() && eta_sys <= T::one()) {
            return Err(Error::invalid("eta_sys", "must be in (0,1]"));
        }
        Ok(Self { s_sat_ghz, n0, eta_sys })
    }

    /// Plateau η_sys·S_sat in MHz.
    pub fn plateau_mhz(&self) -> T {
        self.eta_sys * self.s_sat_ghz * T::of(1e3)
    }
}

/// Detected QD count rate in MHz at flux n̄ (monotone, concave, plateau
/// η_sys·S_sat).
pub fn saturation_counts<T: Real>(p: &SaturationParams<T>, n_bar: T) -> Result<T> {
    if !(n_bar >= T::zero()) {
        return Err(Error::invalid("n_bar", "must be >= 0"));
    }
    Ok(p.plateau_mhz() * n_bar / (n_bar + p.n0))
}

/// Laser-background slope in MHz per unit flux, derived from the residual
/// cavity reflectivity and the flux calibration:
/// β = η_det · R_min · (1/T₁). Absolute backgrounds depend on collection
/// details, so callers may override the slope instead of deriving it.
pub fn background_slope_mhz<T: Real>(
    instr: &InstrumentModel<T>,
    cal: &FluxCalibration<T>,
) -> T {
    // 1/T1 in MHz = 1e6 / t1_ps
    instr.detection_efficiency * instr.background_reflectivity * T::of(1e6) / cal.t1_ps
}

/// Total, background, and QD count rates (MHz) at flux n̄. The background is
/// strictly linear in n̄; the QD part follows the saturation law.
pub fn detected_counts<T: Real>(
    p: &SaturationParams<T>,
    instr: &InstrumentModel<T>,
    cal: &FluxCalibration<T>,
    n_bar: T,
) -> Result<(T, T, T)> {
    let qd = saturation_counts(p, n_bar)?;
    let background = background_slope_mhz(instr, cal) * n_bar;
    Ok((qd + background, background, qd))
}

fn gaussian_kernel<T: Real>(fwhm: T, step: T) -> Vec<T> {
    let sigma = fwhm / T::of(2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    let half_width = (T::of(5.0) * sigma / step).to_f64_lossy().ceil() as usize;
    if half_width == 0 {
        return vec![T::one()];
    }
    let mut k: Vec<T> = (0..=2 * half_width)
        .map(|i| {
            let x = (T::of(i as f64) - T::of(half_width as f64)) * step / sigma;
            (-x * x * T::of(0.5)).exp()
        })
        .collect();
    let sum: T = k.iter().copied().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Discrete convolution with replicate padding at the edges; the kernel must
/// sum to one so constants (and trace baselines) are preserved.
fn convolve_replicate<T: Real>(values: &[T], kernel: &[T]) -> Vec<T> {
    let n = values.len();
    let half = kernel.len() / 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = T::zero();
        for (j, &k) in kernel.iter().enumerate() {
            let idx = i as isize + j as isize - half as isize;
            let idx = idx.clamp(0, n as isize - 1) as usize;
            acc += k * values[idx];
        }
        out.push(acc);
    }
    out
}

/// Smear a correlation trace with a unit-area Gaussian timing response of
/// the given FWHM (ps). Requires a uniform delay grid. A FWHM below the grid
/// step degenerates to the identity; the τ → ∞ baseline is preserved.
pub fn convolve_irf<T: Real>(
    trace: &CorrelationTrace<T>,
    irf_fwhm_ps: T,
) -> Result<CorrelationTrace<T>> {
    if !(irf_fwhm_ps >= T::zero()) {
        return Err(Error::invalid("irf_fwhm_ps", "must be >= 0"));
    }
    let step = trace.uniform_step_ps()?;
    let kernel = gaussian_kernel(irf_fwhm_ps, step);
    if kernel.len() == 1 {
        return Ok(trace.clone());
    }
    Ok(trace.with_values(convolve_replicate(trace.values(), &kernel)))
}

/// Undo [`convolve_irf`] by frequency-domain division with Tikhonov
/// regularization: X̂ = Ŷ K̂* / (|K̂|² + (ε·max|K̂|)²), followed by a mild
/// band limit (Gaussian of FWHM/4) — structure narrower than the response
/// function is not recoverable, and without the limit the stop-band noise
/// gain of 1/2ε swamps measured data. The trace baseline (taken from its
/// ends) is removed before the transform and restored after, keeping edge
/// ringing away from g² dips. Default ε is 0.02, sized for data around
/// SNR 100; raise it for noisier traces.
pub fn deconvolve_irf<T: Real>(
    trace: &CorrelationTrace<T>,
    irf_fwhm_ps: T,
    epsilon: Option<T>,
) -> Result<CorrelationTrace<T>> {
    if !(irf_fwhm_ps >= T::zero()) {
        return Err(Error::invalid("irf_fwhm_ps", "must be >= 0"));
    }
    let eps = epsilon.unwrap_or_else(|| T::of(0.02));
    if !(eps > T::zero()) {
        return Err(Error::invalid("epsilon", "must be > 0"));
    }
    let step = trace.uniform_step_ps()?;
    let kernel = gaussian_kernel(irf_fwhm_ps, step);
    if kernel.len() == 1 {
        return Ok(trace.clone());
    }
    let n = trace.len();
    let m = (n + kernel.len()).next_power_of_two() * 2;

    let baseline = (*trace.values().first().unwrap() + *trace.values().last().unwrap())
        * T::of(0.5);
    let mut y: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
    for (i, &v) in trace.values().iter().enumerate() {
        y[i] = Complex::new((v - baseline).to_f64_lossy(), 0.0);
    }
    let mut k: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); m];
    let half = kernel.len() / 2;
    // center the kernel at index 0 (circular shift) so phases stay aligned
    for (j, &kv) in kernel.iter().enumerate() {
        let idx = (j + m - half) % m;
        k[idx] = Complex::new(kv.to_f64_lossy(), 0.0);
    }

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    let ifft = planner.plan_fft_inverse(m);
    fft.process(&mut y);
    fft.process(&mut k);
    let kmax = k.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let reg = (eps.to_f64_lossy() * kmax).powi(2);
    for (yi, ki) in y.iter_mut().zip(&k) {
        *yi = *yi * ki.conj() / (ki.norm_sqr() + reg);
    }
    ifft.process(&mut y);
    let scale = 1.0 / m as f64;
    let restored: Vec<T> = (0..n).map(|i| T::of(y[i].re * scale) + baseline).collect();
    // band limit of the restoration
    let post = gaussian_kernel(irf_fwhm_ps * T::of(0.25), step);
    let values =
        if post.len() > 1 { convolve_replicate(&restored, &post) } else { restored };
    Ok(trace.with_values(values))
}

/// Mix a Poissonian (flat g² = 1) background into an ideal correlation:
/// g²_meas = 1 + ρ²(g² − 1), where ρ is the signal fraction of the counts.
pub fn add_background_g2<T: Real>(
    trace: &CorrelationTrace<T>,
    signal_fraction: T,
) -> Result<CorrelationTrace<T>> {
    if !(signal_fraction >= T::zero() && signal_fraction <= T::one()) {
        return Err(Error::invalid("signal_fraction", "must be in [0,1]"));
    }
    let r2 = signal_fraction * signal_fraction;
    let values = trace.values().iter().map(|&v| T::one() + r2 * (v - T::one())).collect();
    Ok(trace.with_values(values))
}

/// Invert [`add_background_g2`]; undefined (error) for a zero signal
/// fraction.
pub fn remove_background_g2<T: Real>(
    trace: &CorrelationTrace<T>,
    signal_fraction: T,
) -> Result<CorrelationTrace<T>> {
    if !(signal_fraction > T::zero() && signal_fraction <= T::one()) {
        return Err(Error::invalid(
            "signal_fraction",
            "inversion requires a signal fraction in (0,1]",
        ));
    }
    let r2 = signal_fraction * signal_fraction;
    let values = trace.values().iter().map(|&v| T::one() + (v - T::one()) / r2).collect();
    Ok(trace.with_values(values))
}

fn lorentzian_kernel<T: Real>(fwhm: T, step: T, n: usize) -> Vec<T> {
    // truncated at ±15 FWHM (97.9% of the mass) and renormalized to unit
    // sum, so any source ≥ 15 FWHM from the grid edge keeps its power exactly
    let hwhm = fwhm * T::of(0.5);
    let half_width = ((T::of(15.0) * fwhm / step).to_f64_lossy().ceil() as usize)
        .clamp(10, n - 1);
    let mut k: Vec<T> = (0..=2 * half_width)
        .map(|i| {
            let x = (T::of(i as f64) - T::of(half_width as f64)) * step;
            hwhm / (x * x + hwhm * hwhm)
        })
        .collect();
    let sum: T = k.iter().copied().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Convolve a spectrum with the unit-area Lorentzian line of a scanning
/// filter cavity (FWHM in MHz). The offset grid must resolve the linewidth
/// (spacing ≤ FWHM/2). Zero padding outside the grid: total power on the
/// grid is preserved for spectra that vanish at the edges.
pub fn fp_filter_spectrum<T: Real>(
    spec: &SpectrumTrace<T>,
    instr: &InstrumentModel<T>,
) -> Result<SpectrumTrace<T>> {
    let step = spec.uniform_step()?;
    let fwhm = crate::units::ghz_to_rad_ns(instr.fp_linewidth_mhz * T::of(1e-3));
    if fwhm <= T::zero() {
        return Ok(spec.clone());
    }
    if step > fwhm * T::of(0.5) {
        return Err(Error::GridTooCoarse {
            spacing: step.to_f64_lossy(),
            limit: (fwhm * T::of(0.5)).to_f64_lossy(),
            what: "scanning-filter linewidth",
        });
    }
    let n = spec.len();
    let kernel = lorentzian_kernel(fwhm, step, n);
    let half = kernel.len() / 2;
    let values = spec.intensities();
    let mut out = vec![T::zero(); n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        let j_lo = i.saturating_sub(half);
        let j_hi = (i + half).min(n - 1);
        for j in j_lo..=j_hi {
            // zero padding outside the grid
            acc += values[j] * kernel[half + i - j];
        }
        *o = acc;
    }
    Ok(spec.with_intensities(out))
}

/// Same as [`fp_filter_spectrum`], plus a coherently scattered spike of the
/// given integrated power at `spike_offset_rad_ns` (the laser line seen
/// through the filter, i.e. a Lorentzian at the filter linewidth).
pub fn fp_filter_spectrum_with_spike<T: Real>(
    spec: &SpectrumTrace<T>,
    instr: &InstrumentModel<T>,
    spike_power: T,
    spike_offset_rad_ns: T,
) -> Result<SpectrumTrace<T>> {
    if !(spike_power >= T::zero()) {
        return Err(Error::invalid("spike_power", "must be >= 0"));
    }
    let filtered = fp_filter_spectrum(spec, instr)?;
    let hwhm = crate::units::ghz_to_rad_ns(instr.fp_linewidth_mhz * T::of(1e-3)) * T::of(0.5);
    let inv_pi = T::of(std::f64::consts::FRAC_1_PI);
    let values: Vec<T> = filtered
        .offsets()
        .iter()
        .zip(filtered.intensities())
        .map(|(&w, &v)| {
            let x = w - spike_offset_rad_ns;
            v + spike_power * inv_pi * hwhm / (x * x + hwhm * hwhm)
        })
        .collect();
    Ok(filtered.with_intensities(values))
}

/// Telegraph model of emitter blinking: exponential dwell in a bright state
/// emitting `bright_rate` counts per bin on average, and a dark state
/// emitting none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlinkingModel<T: Real> {
    /// Bright → dark switching rate (1/ms).
    pub rate_on_to_off_per_ms: T,
    /// Dark → bright switching rate (1/ms).
    pub rate_off_to_on_per_ms: T,
    /// Mean counts per bin while bright.
    pub bright_rate_counts_per_bin: T,
}

impl<T: Real> BlinkingModel<T> {
    pub fn new(rate_on_to_off_per_ms: T, rate_off_to_on_per_ms: T, bright_rate: T) -> Result<Self> {
        if !(rate_on_to_off_per_ms > T::zero()) || !(rate_off_to_on_per_ms > T::zero()) {
            return Err(Error::invalid("blinking rates", "must be > 0"));
        }
        if !(bright_rate >= T::zero()) {
            return Err(Error::invalid("bright_rate_counts_per_bin", "must be >= 0"));
        }
        Ok(Self {
            rate_on_to_off_per_ms,
            rate_off_to_on_per_ms,
            bright_rate_counts_per_bin: bright_rate,
        })
    }

    /// Stationary fraction of time spent bright.
    pub fn duty_bright(&self) -> T {
        self.rate_off_to_on_per_ms / (self.rate_on_to_off_per_ms + self.rate_off_to_on_per_ms)
    }
}

/// Simulate a binned count trace of a blinking emitter. Bins are `bin_ms`
/// wide over `duration_s`; counts are Poisson around `bright_rate` scaled by
/// the in-bin bright fraction. Deterministic for a fixed seed.
pub fn blinking_trace(
    model: &BlinkingModel<f64>,
    duration_s: f64,
    bin_ms: f64,
    seed: u64,
) -> Result<Vec<u32>> {
    if !(duration_s > 0.0) || !(bin_ms > 0.0) {
        return Err(Error::invalid("duration/bin", "must be > 0"));
    }
    let duration_ms = duration_s * 1e3;
    let n_bins = (duration_ms / bin_ms).floor() as usize;
    if n_bins < 10 {
        return Err(Error::invalid("duration_s", "must cover many bins"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bright = rng.random::<f64>() < model.duty_bright();
    let mut t_switch = 0.0f64; // next switch time, ms
    let advance = |bright_now: bool, rng: &mut ChaCha8Rng| -> f64 {
        let rate = if bright_now { model.rate_on_to_off_per_ms } else { model.rate_off_to_on_per_ms };
        Exp::new(rate).expect("positive rate").sample(rng)
    };
    t_switch += advance(bright, &mut rng);

    let mut counts = Vec::with_capacity(n_bins);
    for b in 0..n_bins {
        let t0 = b as f64 * bin_ms;
        let t1 = t0 + bin_ms;
        let mut bright_time = 0.0;
        let mut t = t0;
        while t_switch < t1 {
            if bright {
                bright_time += t_switch - t;
            }
            t = t_switch;
            bright = !bright;
            t_switch += advance(bright, &mut rng);
        }
        if bright {
            bright_time += t1 - t;
        }
        let mean = model.bright_rate_counts_per_bin * bright_time / bin_ms;
        let c = if mean > 0.0 {
            Poisson::new(mean).expect("positive mean").sample(&mut rng) as u32
        } else {
            0
        };
        counts.push(c);
    }
    Ok(counts)
}

/// Back out the intrinsic responsivity from a measured one: divide by the
/// optical-path transmission and multiply by the bright-to-average blinking
/// ratio.
pub fn efficiency_budget<T: Real>(
    measured_responsivity: T,
    path_transmission: T,
    blinking_ratio: T,
) -> Result<T> {
    if !(measured_responsivity > T::zero() && measured_responsivity <= T::one()) {
        return Err(Error::invalid("measured_responsivity", "must be in (0,1]"));
    }
    if !(path_transmission > T::zero() && path_transmission <= T::one()) {
        return Err(Error::invalid("path_transmission", "must be in (0,1]"));
    }
    if !(blinking_ratio >= T::one()) {
        return Err(Error::invalid("blinking_ratio", "must be >= 1"));
    }
    Ok(measured_responsivity * blinking_ratio / path_transmission)
}

/// Purcell factor from the cavity-enhanced and out-of-cavity lifetimes:
/// the cavity-added decay rate over the free-space rate, τ_off/τ_on − 1.
pub fn purcell_factor<T: Real>(tau_on_ps: T, tau_off_ps: T) -> Result<T> {
    if !(tau_on_ps > T::zero()) {
        return Err(Error::invalid("tau_on_ps", "must be > 0"));
    }
    if !(tau_off_ps >= tau_on_ps) {
        return Err(Error::invalid(
            "tau_off_ps",
            "out-of-cavity lifetime must be >= the enhanced lifetime",
        ));
    }
    Ok(tau_off_ps / tau_on_ps - T::one())
}

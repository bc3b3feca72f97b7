//! The six fit routines. Initialization heuristics are deterministic and
//! documented inline; bounds keep every model inside its physical domain
//! during iteration.

use super::lm::{least_squares, LmOptions};
use super::{DataSeries, FitResult, Weighting};
use crate::bloch::{DriveParams, EmitterParams};
use crate::correlations::{g2_value, CascadeModel, CascadeOrder, VisibilityModel};
use crate::error::{Error, Result};
use crate::float::Real;
use crate::mollow::spectrum_closed;
use crate::peaks::spectral_features;
use crate::trace::{uniform_step, SpectrumMode, SpectrumTrace};
use crate::units::{ps_to_ns, rad_ns_to_ghz};

const INF: f64 = f64::INFINITY;

/// Fit the saturation law C(n̄) = a·n̄/(n̄+n₀) to (flux, MHz) data and split
/// the plateau `a` into S_sat using the separately measured responsivity.
///
/// Reported parameters: `s_sat_ghz`, `n0`, `sat_rate_mhz` (= η_sys·S_sat).
/// Init: 1/C is linear in 1/n̄ with intercept 1/a and slope n₀/a.
pub fn fit_saturation<T: Real>(data: &DataSeries<T>, eta_sys: T) -> Result<FitResult<T>> {
    if data.len() < 5 {
        return Err(Error::DegenerateData(format!(
            "saturation fit needs >= 5 points spanning linear and plateau regions, got {}",
            data.len()
        )));
    }
    if !(eta_sys > T::zero() && eta_sys <= T::one()) {
        return Err(Error::invalid("eta_sys", "must be in (0,1]"));
    }
    // linearized initializer on the positive points
    let mut sx = T::zero();
    let mut sy = T::zero();
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut m = T::zero();
    for (&x, &y) in data.x.iter().zip(&data.y) {
        if x > T::zero() && y > T::zero() {
            let (u, v) = (x.recip(), y.recip());
            sx += u;
            sy += v;
            sxx += u * u;
            sxy += u * v;
            m += T::one();
        }
    }
    if m < T::of(3.0) {
        return Err(Error::DegenerateData("too few positive saturation points".into()));
    }
    let denom = m * sxx - sx * sx;
    let (a0, n00) = if denom.abs() > T::zero() {
        let slope = (m * sxy - sx * sy) / denom;
        let intercept = (sy - slope * sx) / m;
        if intercept > T::zero() && slope > T::zero() {
            (intercept.recip(), slope / intercept)
        } else {
            (data.y.iter().copied().fold(T::zero(), T::max), T::of(0.1))
        }
    } else {
        (data.y.iter().copied().fold(T::zero(), T::max), T::of(0.1))
    };

    let w = data.weights(Weighting::Unweighted);
    let outcome = least_squares(
        |p: &[T], r: &mut [T]| {
            for (i, (&x, &y)) in data.x.iter().zip(&data.y).enumerate() {
                r[i] = w[i] * (p[0] * x / (x + p[1]) - y);
            }
            Ok(())
        },
        data.len(),
        &[a0, n00],
        &[T::of(1e-12), T::of(1e-9)],
        &[T::of(INF), T::of(INF)],
        &LmOptions::default(),
    )?;

    let a = outcome.params[0];
    let n0 = outcome.params[1];
    let x_max = data.x.iter().copied().fold(T::zero(), T::max);
    if x_max < T::of(2.0) * n0 {
        return Err(Error::DegenerateData(format!(
            "all points in the linear region: max flux {x_max} < 2 n0 = {}",
            T::of(2.0) * n0
        )));
    }

    let mut result = FitResult::from_outcome(&outcome, &["sat_rate_mhz", "n0"]);
    let thousand = T::of(1e3);
    let s_sat = a / (eta_sys * thousand);
    let s_sat_err = outcome
        .std_errors
        .as_ref()
        .map(|e| e[0] / (eta_sys * thousand));
    result.push_param("s_sat_ghz", s_sat, s_sat_err);
    Ok(result)
}

fn replicate_convolve<T: Real>(values: &[T], kernel: &[T]) -> Vec<T> {
    let n = values.len();
    let half = kernel.len() / 2;
    (0..n)
        .map(|i| {
            let mut acc = T::zero();
            for (j, &k) in kernel.iter().enumerate() {
                let idx = (i as isize + j as isize - half as isize).clamp(0, n as isize - 1);
                acc += k * values[idx as usize];
            }
            acc
        })
        .collect()
}

/// Exponential decay θ(t−t0)·amp·e^{−(t−t0)/t1} averaged over each sample
/// cell [x−step/2, x+step/2]. The cell average is continuous in `t0`, which
/// keeps the least-squares surface smooth while the onset slides between
/// samples.
fn sampled_decay<T: Real>(xs: &[T], step: T, t1: T, amp: T, t0: T) -> Vec<T> {
    let half = step * T::of(0.5);
    xs.iter()
        .map(|&x| {
            let cell_hi = x + half;
            if cell_hi <= t0 {
                return T::zero();
            }
            let lo = (x - half).max(t0);
            // (t1/step)·(e^{−(lo−t0)/t1} − e^{−(hi−t0)/t1})
            amp * t1 / step * ((-(lo - t0) / t1).exp() - (-(cell_hi - t0) / t1).exp())
        })
        .collect()
}

fn gaussian_kernel_samples<T: Real>(fwhm: T, step: T) -> Vec<T> {
    let sigma = fwhm / T::of(2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    let half = (T::of(5.0) * sigma / step).to_f64_lossy().ceil() as usize;
    if half == 0 {
        return vec![T::one()];
    }
    let mut k: Vec<T> = (0..=2 * half)
        .map(|i| {
            let x = (T::of(i as f64) - T::of(half as f64)) * step / sigma;
            (-x * x * T::of(0.5)).exp()
        })
        .collect();
    let s: T = k.iter().copied().sum();
    for v in &mut k {
        *v /= s;
    }
    k
}

/// Fit a single-exponential decay convolved with a Gaussian timing response
/// to time-resolved counts on a uniform grid.
///
/// Reported parameters: `t1_ps`, `amplitude`, `t0_ps`.
/// Init: onset from the peak minus the IRF width, decay from the log-slope
/// of the tail. Poisson weights.
pub fn fit_lifetime<T: Real>(data: &DataSeries<T>, irf_fwhm_ps: T) -> Result<FitResult<T>> {
    if data.len() < 8 {
        return Err(Error::DegenerateData("lifetime fit needs >= 8 samples".into()));
    }
    let step = uniform_step(&data.x)?;
    if !(irf_fwhm_ps >= T::zero()) {
        return Err(Error::invalid("irf_fwhm_ps", "must be >= 0"));
    }
    let kernel = gaussian_kernel_samples(irf_fwhm_ps, step);

    let (i_peak, &y_peak) = data
        .y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    // log-slope of the tail between peak/2 and peak/50
    let mut sx = T::zero();
    let mut sy = T::zero();
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut m = T::zero();
    for i in i_peak..data.len() {
        let y = data.y[i];
        if y > y_peak * T::of(0.02) && y < y_peak * T::of(0.5) && y > T::zero() {
            let (u, v) = (data.x[i], y.ln());
            sx += u;
            sy += v;
            sxx += u * u;
            sxy += u * v;
            m += T::one();
        }
    }
    let t1_0 = if m >= T::of(3.0) {
        let denom = m * sxx - sx * sx;
        let slope = (m * sxy - sx * sy) / denom;
        if slope < T::zero() {
            -slope.recip()
        } else {
            (data.x[data.len() - 1] - data.x[0]) * T::of(0.2)
        }
    } else {
        (data.x[data.len() - 1] - data.x[0]) * T::of(0.2)
    };
    let t0_0 = data.x[i_peak] - irf_fwhm_ps.max(step);
    let amp_0 = y_peak;

    let xs = data.x.clone();
    let model = move |p: &[T]| -> Vec<T> {
        let decay = sampled_decay(&xs, step, p[0], p[1], p[2]);
        replicate_convolve(&decay, &kernel)
    };

    // two passes: weights from the observed counts seed the fit, then from
    // the fitted model — weighting by observed counts alone biases decay
    // constants low by over-trusting downward fluctuations in the tail
    let lower = [step * T::of(0.01), T::zero(), data.x[0] - irf_fwhm_ps * T::of(4.0)];
    let upper = [T::of(INF), T::of(INF), data.x[data.len() - 1]];
    let mut w = data.weights(Weighting::Poisson);
    let mut start = vec![t1_0, amp_0, t0_0];
    let mut outcome = None;
    for _pass in 0..2 {
        let o = least_squares(
            |p: &[T], r: &mut [T]| {
                let m = model(p);
                for i in 0..r.len() {
                    r[i] = w[i] * (m[i] - data.y[i]);
                }
                Ok(())
            },
            data.len(),
            &start,
            &lower,
            &upper,
            &LmOptions::default(),
        )?;
        if data.y_err.is_none() {
            let m = model(&o.params);
            w = m.iter().map(|&v| v.max(T::one()).sqrt().recip()).collect();
        }
        start = o.params.clone();
        outcome = Some(o);
    }
    let outcome = outcome.expect("two passes ran");

    let mut result = FitResult::from_outcome(&outcome, &["t1_ps", "amplitude", "t0_ps"]);
    let t1 = outcome.params[0];
    let tail = data.x[data.len() - 1] - outcome.params[2];
    if tail < T::of(3.0) * t1 {
        result.warnings.push(format!(
            "decay tail covers only {:.2} lifetimes; t1 may be biased",
            (tail / t1).to_f64_lossy()
        ));
    }
    Ok(result)
}

/// Extract the Rabi frequency from a sampled emission spectrum.
///
/// The primary estimate is half the separation of the outermost spectral
/// features (distinct maxima when resolved, curvature shoulders otherwise);
/// it seeds a least-squares refinement against the closed-form spectrum in
/// standard mode with T₁, T₂ held fixed.
///
/// Reported parameters: `rabi_ghz`, `scale`.
pub fn fit_spectrum_rabi<T: Real>(
    spec: &SpectrumTrace<T>,
    emitter: &EmitterParams<T>,
) -> Result<FitResult<T>> {
    let (features, from_curvature) = spectral_features(spec.offsets(), spec.intensities(), T::of(0.01));
    if features.len() < 3 {
        return Err(Error::NoSidebands { found: features.len() });
    }
    let split = features[features.len() - 1] - features[0];
    let om0 = (split * T::of(0.5)).max(T::of(1e-3));
    let half_diff = (emitter.gamma1() - emitter.gamma2()) * T::of(0.5);
    let om_floor = half_diff.abs() * T::of(1.02) + T::of(1e-6);
    let peak = spec.intensities().iter().copied().fold(T::zero(), T::max);

    let offsets = spec.offsets().to_vec();
    let ys = spec.intensities().to_vec();
    let em = *emitter;

    // least-squares-optimal overall scale at the feature-based drive guess,
    // so arbitrarily normalized data (counts, normalized density, ...) start
    // near the model surface
    let om_start = om0.max(om_floor);
    let scale0 = {
        let drive = DriveParams::from_ghz(rad_ns_to_ghz(om_start), T::zero())?;
        let model = spectrum_closed(&em, &drive, &offsets, SpectrumMode::Standard)?;
        let num: T = model.intensities().iter().zip(&ys).map(|(&m, &y)| m * y).sum();
        let den: T = model.intensities().iter().map(|&m| m * m).sum();
        if den > T::zero() && num > T::zero() {
            num / den
        } else {
            T::one()
        }
    };

    // two passes, reweighting by the fitted model in between: count-scaled
    // spectra get proper 1/√counts weights, while normalized traces (every
    // model value well below 1) stay effectively unweighted
    let lower = [om_floor, T::of(1e-12)];
    let upper = [T::of(INF), T::of(INF)];
    let mut w = vec![T::one(); ys.len()];
    let mut start = vec![om_start, scale0];
    let mut outcome = None;
    for _pass in 0..2 {
        let o = least_squares(
            |p: &[T], r: &mut [T]| {
                let drive = DriveParams::from_ghz(rad_ns_to_ghz(p[0]), T::zero())
                    .map_err(|e| Error::invalid("rabi", e.to_string()))?;
                let model = spectrum_closed(&em, &drive, &offsets, SpectrumMode::Standard)?;
                for (i, (mv, &y)) in model.intensities().iter().zip(&ys).enumerate() {
                    r[i] = w[i] * (p[1] * *mv - y);
                }
                Ok(())
            },
            ys.len(),
            &start,
            &lower,
            &upper,
            &LmOptions::default(),
        )?;
        let drive = DriveParams::from_ghz(rad_ns_to_ghz(o.params[0]), T::zero())?;
        let model = spectrum_closed(&em, &drive, &offsets, SpectrumMode::Standard)?;
        w = model
            .intensities()
            .iter()
            .map(|&m| (o.params[1] * m).max(T::one()).sqrt().recip())
            .collect();
        start = o.params.clone();
        outcome = Some(o);
    }
    let outcome = outcome.expect("two passes ran");

    let mut result = FitResult::from_outcome(&outcome, &["rabi_rad_ns", "scale"]);
    // report in cyclic GHz
    let om = outcome.params[0];
    let om_err = outcome.std_errors.as_ref().map(|e| rad_ns_to_ghz(e[0]));
    result = result.rename("rabi_rad_ns", "rabi_ghz");
    for (n, v) in result.params.iter_mut() {
        if n == "rabi_ghz" {
            *v = rad_ns_to_ghz(om);
        }
    }
    if let (Some(es), Some(e)) = (result.std_errors.as_mut(), om_err) {
        for (n, v) in es.iter_mut() {
            if n == "rabi_ghz" {
                *v = e;
            }
        }
    }
    if from_curvature {
        result
            .warnings
            .push("sidebands unresolved; initialized from curvature shoulders".into());
    }
    if peak <= T::zero() {
        result.warnings.push("spectrum has no positive intensity".into());
    }
    Ok(result)
}

/// Options for [`fit_g2`].
#[derive(Debug, Clone, Copy)]
pub struct FitG2Options<T: Real> {
    /// Timing-response FWHM baked into the model (ps).
    pub irf_fwhm_ps: T,
    /// Fit the FWHM as a third parameter instead of holding it fixed.
    pub fit_irf: bool,
}

impl<T: Real> Default for FitG2Options<T> {
    fn default() -> Self {
        Self { irf_fwhm_ps: T::of(40.0), fit_irf: false }
    }
}

/// Fit a measured g²(τ) with the ideal-emitter correlation wrapped in the
/// instrument chain: Poissonian background mixing (signal fraction ρ) and
/// Gaussian timing smearing.
///
/// Reported parameters: `rabi_ghz`, `signal_fraction`, and `irf_fwhm_ps`
/// when fitted. A relative Rabi uncertainty above 50% is flagged as
/// under-constrained (weak drive: the dip shape barely depends on Ω).
pub fn fit_g2<T: Real>(
    data: &DataSeries<T>,
    emitter: &EmitterParams<T>,
    opts: FitG2Options<T>,
) -> Result<FitResult<T>> {
    if data.len() < 16 {
        return Err(Error::DegenerateData("g2 fit needs >= 16 samples".into()));
    }
    let step = uniform_step(&data.x)?;
    let span = data.x[data.len() - 1] - data.x[0];
    let eta = emitter.eta();
    let short_span = ps_to_ns(span) < T::of(3.0) / eta;

    // initializers
    let y_min = data.y.iter().copied().fold(T::infinity(), T::min);
    let rho0 = (T::one() - y_min).max(T::of(0.04)).min(T::one()).sqrt();
    // first interior maximum above baseline on the τ > 0 side sets μ
    let mut om0 = T::of(0.5) / emitter.t1_ns();
    let half_diff = (emitter.gamma1() - emitter.gamma2()) * T::of(0.5);
    for i in 1..data.len() - 1 {
        if data.x[i] > T::zero()
            && data.y[i] > T::of(1.02)
            && data.y[i] > data.y[i - 1]
            && data.y[i] >= data.y[i + 1]
        {
            let mu = T::PI() / ps_to_ns(data.x[i]);
            om0 = (mu * mu + half_diff * half_diff).sqrt();
            break;
        }
    }

    let w = data.weights(Weighting::Unweighted);
    let xs = data.x.clone();
    let residual = |p: &[T], r: &mut [T]| -> Result<()> {
        let om = p[0];
        let rho = p[1];
        let fwhm = if opts.fit_irf { p[2] } else { opts.irf_fwhm_ps };
        let mu_sq = om * om - half_diff * half_diff;
        let ideal: Vec<T> = xs.iter().map(|&t| g2_value(eta, mu_sq, ps_to_ns(t))).collect();
        let kernel = gaussian_kernel_samples(fwhm, step);
        let smeared = replicate_convolve(&ideal, &kernel);
        let r2 = rho * rho;
        for i in 0..r.len() {
            let model = T::one() + r2 * (smeared[i] - T::one());
            r[i] = w[i] * (model - data.y[i]);
        }
        Ok(())
    };

    let mut x0 = vec![om0, rho0];
    let mut lo = vec![T::zero(), T::of(1e-3)];
    let mut hi = vec![T::of(INF), T::one()];
    if opts.fit_irf {
        x0.push(opts.irf_fwhm_ps.max(step));
        lo.push(T::zero());
        hi.push(ps_to_ns(span) * T::of(1e3));
    }
    let outcome = least_squares(residual, data.len(), &x0, &lo, &hi, &LmOptions::default())?;

    let names: &[&str] = if opts.fit_irf {
        &["rabi_rad_ns", "signal_fraction", "irf_fwhm_ps"]
    } else {
        &["rabi_rad_ns", "signal_fraction"]
    };
    let mut result = FitResult::from_outcome(&outcome, names).rename("rabi_rad_ns", "rabi_ghz");
    let om = outcome.params[0];
    for (n, v) in result.params.iter_mut() {
        if n == "rabi_ghz" {
            *v = rad_ns_to_ghz(om);
        }
    }
    if let Some(es) = result.std_errors.as_mut() {
        for (n, v) in es.iter_mut() {
            if n == "rabi_ghz" {
                *v = rad_ns_to_ghz(*v);
            }
        }
    }

    // over-damped fits (μ² ≤ 0) have no oscillation to pin the drive; the
    // dip shape then constrains Ω only weakly
    let mu_sq_fit = om * om - half_diff * half_diff;
    let om_rel_err = result
        .std_err("rabi_ghz")
        .map(|e| e / rad_ns_to_ghz(om).max(T::of(1e-12)));
    if mu_sq_fit <= T::zero() {
        result
            .warnings
            .push("rabi under-constrained: fitted drive is over-damped (no oscillation)".into());
    } else {
        match om_rel_err {
            Some(rel) if rel > T::of(0.5) => result
                .warnings
                .push("rabi under-constrained: no oscillation visible in the trace".into()),
            None => result.warnings.push("rabi under-constrained: singular covariance".into()),
            _ => {}
        }
    }
    if short_span {
        result.warnings.push("delay span below 3/eta; baseline poorly constrained".into());
    }
    Ok(result)
}

/// Fit the two-component visibility decay, holding T₁, Ω and the laser
/// coherence time fixed at the template values.
///
/// Reported parameters: `t2_ps`, `coherent_fraction`.
pub fn fit_visibility<T: Real>(
    data: &DataSeries<T>,
    template: &VisibilityModel<T>,
) -> Result<FitResult<T>> {
    if data.len() < 8 {
        return Err(Error::DegenerateData("visibility fit needs >= 8 samples".into()));
    }
    let t1_ps = template.emitter.t1_ps();
    let drive = template.drive;
    let laser = template.laser_coherence_time_ns;

    // plateau level ~ coherent fraction; fast component rides on top
    let tail_start = data.len() * 3 / 4;
    let mut c0 = T::zero();
    for i in tail_start..data.len() {
        c0 += data.y[i];
    }
    c0 = (c0 / T::of((data.len() - tail_start) as f64)).max(T::zero()).min(T::of(0.95));
    let t2_0 = template.emitter.t2_ps();

    let w = data.weights(Weighting::Unweighted);
    let outcome = least_squares(
        |p: &[T], r: &mut [T]| {
            let emitter = EmitterParams::from_ps(t1_ps, p[0])?;
            let model = VisibilityModel {
                coherent_fraction: p[1],
                laser_coherence_time_ns: laser,
                emitter,
                drive,
            };
            for (i, (&x, &y)) in data.x.iter().zip(&data.y).enumerate() {
                r[i] = w[i] * (model.value(ps_to_ns(x)) - y);
            }
            Ok(())
        },
        data.len(),
        &[t2_0, c0],
        &[t1_ps * T::of(1e-3), T::zero()],
        &[T::of(2.0) * t1_ps, T::one()],
        &LmOptions::default(),
    )?;

    Ok(FitResult::from_outcome(&outcome, &["t2_ps", "coherent_fraction"]))
}

/// Cascade fit output: the usual result plus the detected heralding order.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeFit<T: Real> {
    pub result: FitResult<T>,
    pub order: CascadeOrder,
}

/// Fit the asymmetric two-exponential bunching model to a sideband
/// cross-correlation. The heralding order is read off the sign of the peak
/// position; symmetric or featureless data is an error.
///
/// Reported parameters: `tau_rise_ps`, `tau_fall_ps`, `amplitude`.
pub fn fit_cascade<T: Real>(data: &DataSeries<T>) -> Result<CascadeFit<T>> {
    if data.len() < 16 {
        return Err(Error::DegenerateData("cascade fit needs >= 16 samples".into()));
    }
    // baseline from the outer 10% on each side
    let edge = (data.len() / 10).max(2);
    let mut base = T::zero();
    for i in 0..edge {
        base = base + data.y[i] + data.y[data.len() - 1 - i];
    }
    base /= T::of((2 * edge) as f64);

    let mut peak_pos = T::zero();
    let mut peak_neg = T::zero();
    let mut t_peak_pos = T::zero();
    let mut t_peak_neg = T::zero();
    for (&x, &y) in data.x.iter().zip(&data.y) {
        let h = y - base;
        if x > T::zero() && h > peak_pos {
            peak_pos = h;
            t_peak_pos = x;
        }
        if x < T::zero() && h > peak_neg {
            peak_neg = h;
            t_peak_neg = x;
        }
    }
    let h_max = peak_pos.max(peak_neg);
    if h_max < T::of(0.05) * base.max(T::of(1e-12)) {
        return Err(Error::AmbiguousCascade("trace is flat within 5% of baseline".into()));
    }
    let asym = (peak_pos - peak_neg).abs() / h_max;
    if asym < T::of(0.02) {
        return Err(Error::AmbiguousCascade(format!(
            "peak heights on both sides agree within {}%; order undecidable",
            (asym * T::of(100.0)).to_f64_lossy()
        )));
    }
    let order = if peak_pos > peak_neg {
        CascadeOrder::THeraldsF
    } else {
        CascadeOrder::FHeraldsT
    };
    let t_peak = match order {
        CascadeOrder::THeraldsF => t_peak_pos,
        CascadeOrder::FHeraldsT => -t_peak_neg,
    };

    let rise0 = (t_peak * T::of(0.5)).max(T::of(1.0));
    let fall0 = (t_peak * T::of(1.5)).max(T::of(2.0));
    let amp0 = (h_max * T::of(3.0)).max(T::of(0.05));

    let w = data.weights(Weighting::Unweighted);
    let outcome = least_squares(
        |p: &[T], r: &mut [T]| {
            let model = CascadeModel {
                tau_rise_ps: p[0],
                tau_fall_ps: p[1],
                amplitude: p[2],
                baseline: T::one(),
                order,
            };
            for (i, (&x, &y)) in data.x.iter().zip(&data.y).enumerate() {
                r[i] = w[i] * (model.value(x) - y);
            }
            Ok(())
        },
        data.len(),
        &[rise0, fall0, amp0],
        &[T::of(1e-3), T::of(1e-3), T::of(1e-6)],
        &[T::of(INF), T::of(INF), T::of(INF)],
        &LmOptions::default(),
    )?;

    Ok(CascadeFit {
        result: FitResult::from_outcome(&outcome, &["tau_rise_ps", "tau_fall_ps", "amplitude"]),
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{cascade_cross_correlation, g2_closed, visibility};
    use crate::instrument::{add_background_g2, convolve_irf};
    use crate::trace::linspace;
    use crate::units::ghz_to_rad_ns;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn reference_emitter() -> EmitterParams<f64> {
        EmitterParams::<f64>::from_ps(56.8, 103.5).unwrap()
    }

    #[test]
    fn saturation_noiseless_exact_and_degenerate_cases() {
        let xs: Vec<f64> = vec![0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0];
        let ys: Vec<f64> = xs.iter().map(|&n| 81.48 * n / (n + 0.125)).collect();
        let data = DataSeries::new(xs, ys, None).unwrap();
        let fit = fit_saturation(&data, 0.03).unwrap();
        assert!(fit.converged);
        assert!((fit.param("s_sat_ghz").unwrap() - 2.716).abs() < 1e-6);
        assert!((fit.param("n0").unwrap() - 0.125).abs() < 1e-8);

        // two points: degenerate
        let d2 = DataSeries::new(vec![0.1, 1.0], vec![10.0, 50.0], None).unwrap();
        assert!(matches!(fit_saturation(&d2, 0.03), Err(Error::DegenerateData(_))));

        // all points deep in the linear region
        let xs: Vec<f64> = vec![0.001, 0.002, 0.003, 0.004, 0.005, 0.006];
        let ys: Vec<f64> = xs.iter().map(|&n| 81.48 * n / (n + 0.125)).collect();
        let d = DataSeries::new(xs, ys, None).unwrap();
        assert!(matches!(fit_saturation(&d, 0.03), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn lifetime_noiseless_without_irf_is_exact() {
        let xs: Vec<f64> = linspace(0.0, 400.0, 201);
        let ys = sampled_decay(&xs, 2.0, 56.8, 1e4, 30.0);
        let data = DataSeries::new(xs, ys, None).unwrap();
        let fit = fit_lifetime(&data, 0.0).unwrap();
        assert!((fit.param("t1_ps").unwrap() - 56.8).abs() < 1e-5);
        assert!((fit.param("t0_ps").unwrap() - 30.0).abs() < 1e-4);
        assert!((fit.param("amplitude").unwrap() - 1e4).abs() < 1.0);
    }

    #[test]
    fn lifetime_poisson_roundtrip_with_irf() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = linspace(0.0, 500.0, 251);
        let clean: Vec<f64> = {
            let decay = sampled_decay(&xs, 2.0, 56.8, 1e4, 60.0);
            let kernel = gaussian_kernel_samples(40.0, 2.0);
            replicate_convolve(&decay, &kernel)
        };
        let noisy: Vec<f64> = clean
            .iter()
            .map(|&m| {
                if m > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    (m + z * m.sqrt()).max(0.0)
                } else {
                    0.0
                }
            })
            .collect();
        let data = DataSeries::new(xs, noisy, None).unwrap();
        let fit = fit_lifetime(&data, 40.0).unwrap();
        let t1 = fit.param("t1_ps").unwrap();
        assert!((t1 - 56.8).abs() / 56.8 < 0.03, "t1 = {t1}");
    }

    #[test]
    fn spectrum_rabi_roundtrip_and_no_sidebands() {
        let em = reference_emitter();
        let grid = linspace(-120.0, 120.0, 1601);
        let dr = DriveParams::<f64>::resonant_ghz(4.0).unwrap();
        let spec = spectrum_closed(&em, &dr, &grid, SpectrumMode::Standard).unwrap();
        let fit = fit_spectrum_rabi(&spec, &em).unwrap();
        let rabi = fit.param("rabi_ghz").unwrap();
        assert!((rabi - 4.0).abs() < 0.08, "rabi = {rabi}");

        // merged spectrum at weak drive: no usable features
        let weak = DriveParams::<f64>::resonant_ghz(1.0).unwrap();
        let spec = spectrum_closed(&em, &weak, &linspace(-60.0, 60.0, 1201), SpectrumMode::Standard)
            .unwrap();
        assert!(matches!(
            fit_spectrum_rabi(&spec, &em),
            Err(Error::NoSidebands { .. })
        ));
    }

    #[test]
    fn g2_noiseless_roundtrip_exact() {
        let em = reference_emitter();
        let dr = DriveParams::<f64>::resonant_ghz(4.0).unwrap();
        let grid = linspace(-800.0, 800.0, 401);
        let ideal = g2_closed(&em, &dr, &grid).unwrap();
        let data = DataSeries::new(grid, ideal.values().to_vec(), None).unwrap();
        let fit = fit_g2(&data, &em, FitG2Options { irf_fwhm_ps: 0.0, fit_irf: false }).unwrap();
        assert!((fit.param("rabi_ghz").unwrap() - 4.0).abs() < 1e-4);
        assert!((fit.param("signal_fraction").unwrap() - 1.0).abs() < 1e-4);
        assert!(fit.warnings.is_empty(), "{:?}", fit.warnings);
    }

    #[test]
    fn g2_instrumented_roundtrip() {
        let em = reference_emitter();
        let dr = DriveParams::<f64>::resonant_ghz(4.0).unwrap();
        let grid = linspace(-800.0, 800.0, 401);
        let ideal = g2_closed(&em, &dr, &grid).unwrap();
        let smeared = convolve_irf(&ideal, 40.0).unwrap();
        let mixed = add_background_g2(&smeared, 0.9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let noisy: Vec<f64> = mixed
            .values()
            .iter()
            .map(|&v| v + 0.02 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let data = DataSeries::new(grid, noisy, None).unwrap();
        let fit = fit_g2(&data, &em, FitG2Options { irf_fwhm_ps: 40.0, fit_irf: false }).unwrap();
        let rabi = fit.param("rabi_ghz").unwrap();
        let rho = fit.param("signal_fraction").unwrap();
        assert!((rabi - 4.0).abs() / 4.0 < 0.05, "rabi {rabi}");
        assert!((rho - 0.9).abs() < 0.05, "rho {rho}");
    }

    #[test]
    fn g2_weak_drive_flags_underconstrained_rabi() {
        let em = reference_emitter();
        // over-damped drive: dip shape nearly Ω-independent
        let grid = linspace(-800.0, 800.0, 401);
        let eta = em.eta();
        let half_diff = (em.gamma1() - em.gamma2()) / 2.0;
        let om = ghz_to_rad_ns(0.3);
        let values: Vec<f64> = grid
            .iter()
            .map(|&t| {
                let ideal = g2_value(eta, om * om - half_diff * half_diff, ps_to_ns(t));
                1.0 + 0.96 * 0.96 * (ideal - 1.0)
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let noisy: Vec<f64> =
            values.iter().map(|&v| v + 0.02 * rng.sample::<f64, _>(StandardNormal)).collect();
        let data = DataSeries::new(grid, noisy, None).unwrap();
        let fit = fit_g2(&data, &em, FitG2Options { irf_fwhm_ps: 40.0, fit_irf: false }).unwrap();
        assert!(
            fit.warnings.iter().any(|w| w.contains("under-constrained")),
            "warnings: {:?}",
            fit.warnings
        );
    }

    #[test]
    fn visibility_roundtrip_recovers_t2() {
        let em = reference_emitter();
        let dr = DriveParams::<f64>::resonant_ghz(4.0).unwrap();
        let template = VisibilityModel::<f64>::new(0.45, 3200.0, em, dr).unwrap();
        let delays = linspace(0.0, 1500.0, 151);
        let clean = visibility(&template, &delays).unwrap();
        let data = DataSeries::new(delays, clean.values().to_vec(), None).unwrap();
        // start the search away from the truth
        let start = VisibilityModel::<f64>::new(0.2, 3200.0, EmitterParams::<f64>::from_ps(56.8, 80.0).unwrap(), dr)
            .unwrap();
        let fit = fit_visibility(&data, &start).unwrap();
        assert!((fit.param("t2_ps").unwrap() - 103.5).abs() < 0.5);
        assert!((fit.param("coherent_fraction").unwrap() - 0.45).abs() < 0.01);
    }

    #[test]
    fn visibility_pure_incoherent_limit_recovered_exactly() {
        // no coherent component: the decay is the emitter coherence alone
        let em = reference_emitter();
        let dr = DriveParams::<f64>::resonant_ghz(4.0).unwrap();
        let truth = VisibilityModel::<f64>::new(0.0, 3200.0, em, dr).unwrap();
        let delays = linspace(0.0, 1000.0, 101);
        let clean = visibility(&truth, &delays).unwrap();
        let data = DataSeries::new(delays, clean.values().to_vec(), None).unwrap();
        let start = VisibilityModel::<f64>::new(
            0.3,
            3200.0,
            EmitterParams::<f64>::from_ps(56.8, 80.0).unwrap(),
            dr,
        )
        .unwrap();
        let fit = fit_visibility(&data, &start).unwrap();
        assert!((fit.param("t2_ps").unwrap() - 103.5).abs() < 1e-5);
        assert!(fit.param("coherent_fraction").unwrap() < 1e-6);
    }

    #[test]
    fn cascade_roundtrip_order_detection_and_flat_error() {
        let grid = linspace(-600.0, 600.0, 601);
        let blue = CascadeModel::<f64>::new(57.8, 91.8, 0.8, CascadeOrder::THeraldsF).unwrap();
        let trace = cascade_cross_correlation(&blue, &grid).unwrap();
        let data = DataSeries::new(grid.clone(), trace.values().to_vec(), None).unwrap();
        let fit = fit_cascade(&data).unwrap();
        assert_eq!(fit.order, CascadeOrder::THeraldsF);
        assert!((fit.result.param("tau_rise_ps").unwrap() - 57.8).abs() < 0.5);
        assert!((fit.result.param("tau_fall_ps").unwrap() - 91.8).abs() < 0.5);

        let red = CascadeModel::<f64>::new(42.9, 95.1, 0.8, CascadeOrder::FHeraldsT).unwrap();
        let trace = cascade_cross_correlation(&red, &grid).unwrap();
        let data = DataSeries::new(grid.clone(), trace.values().to_vec(), None).unwrap();
        let fit = fit_cascade(&data).unwrap();
        assert_eq!(fit.order, CascadeOrder::FHeraldsT);

        let flat = DataSeries::new(grid, vec![1.0; 601], None).unwrap();
        assert!(matches!(fit_cascade(&flat), Err(Error::AmbiguousCascade(_))));
    }
}

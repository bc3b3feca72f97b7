//! Command implementations.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;

use mollow::bloch::{
    g1_incoh_regression, g2_regression, spectrum_regression, steady_state, DriveParams,
    EmitterParams,
};
use mollow::correlations::{
    cascade_cross_correlation, g1_incoh_closed, g2_closed, visibility, CascadeModel, CascadeOrder,
};
use mollow::fit::{
    fit_cascade, fit_g2, fit_lifetime, fit_saturation, fit_spectrum_rabi, fit_visibility,
    FitG2Options, FitResult,
};
use mollow::instrument::{
    add_background_g2, convolve_irf, detected_counts, fp_filter_spectrum_with_spike,
    remove_background_g2, deconvolve_irf, FluxCalibration, SaturationParams,
};
use mollow::mc::{
    correlate, cross_correlate, simulate_stream, tags, CorrelogramConfig, Normalization,
};
use mollow::mollow::{coefficients, rabi_from_flux, sideband_positions, spectrum_closed};
use mollow::trace::{linspace, CorrelationTrace, SpectrumMode, SpectrumTrace};
use mollow::units::ghz_to_rad_ns;

use crate::output::{data_series_from_csv, fit_result_json, write_csv, write_json};
use crate::scenario::Scenario;
use crate::{Command, Failure, FigureId, FitKind, ModeArg, NormArg};

pub fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Spectrum { scenario, mode, span_ghz, points, numeric, out } => {
            cmd_spectrum(&scenario, mode, span_ghz, points, numeric, &out)
        }
        Command::G2 { scenario, instrumented, numeric, span_ps, points, out } => {
            cmd_g2(&scenario, instrumented, numeric, span_ps, points, &out)
        }
        Command::G1 { scenario, instrumented, numeric, span_ps, points, out } => {
            cmd_g1(&scenario, instrumented, numeric, span_ps, points, &out)
        }
        Command::Cascade { scenario, instrumented, span_ps, points, out } => {
            cmd_cascade(&scenario, instrumented, span_ps, points, &out)
        }
        Command::Fit { kind, data, out, scenario, fit_irf, max_iterations } => {
            cmd_fit(kind, &data, &out, scenario.as_deref(), fit_irf, max_iterations)
        }
        Command::Mc { scenario, duration_ms, efficiency, seed, tags } => {
            cmd_mc(&scenario, duration_ms, efficiency, seed, &tags)
        }
        Command::Correlate { tags, tags_b, bin_ps, max_tau_ps, normalization, out } => {
            cmd_correlate(&tags, tags_b.as_deref(), bin_ps, max_tau_ps, normalization, &out)
        }
        Command::Reproduce { figure, out } => cmd_reproduce(figure, &out),
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    Scenario::load(path).map_err(|e| Failure::usage(e.to_string()))
}

fn grid_ps(span_ps: f64, points: usize) -> Result<Vec<f64>, Failure> {
    if !(span_ps > 0.0) || points < 8 {
        return Err(Failure::usage("span_ps must be > 0 and points >= 8"));
    }
    Ok(linspace(-span_ps, span_ps, points))
}

fn cmd_spectrum(
    scenario: &Path,
    mode: ModeArg,
    span_ghz: Option<f64>,
    points: usize,
    numeric: bool,
    out: &Path,
) -> Result<(), Failure> {
    let sc = load(scenario)?;
    let emitter = sc.emitter().map_err(|e| Failure::usage(e.to_string()))?;
    let drive = sc.drive().map_err(|e| Failure::usage(e.to_string()))?;
    let span = span_ghz.unwrap_or_else(|| (5.0 * drive.rabi_ghz()).max(6.4));
    if !(span > 0.0) || points < 16 {
        return Err(Failure::usage("span_ghz must be > 0 and points >= 16"));
    }
    let offsets = linspace(-ghz_to_rad_ns(span), ghz_to_rad_ns(span), points);
    let trace = if numeric {
        spectrum_regression(&emitter, &drive, &offsets).map_err(Failure::from_lib)?
    } else {
        let m = match mode {
            ModeArg::Literal => SpectrumMode::Literal,
            ModeArg::Standard => SpectrumMode::Standard,
        };
        spectrum_closed(&emitter, &drive, &offsets, m).map_err(Failure::from_lib)?
    };
    write_spectrum_csv(out, &trace, "emission spectrum")?;

    // sidecar: derived coefficient set (JSON lines)
    let sidecar = out.with_extension("jsonl");
    let mut lines = Vec::new();
    match coefficients(&emitter, &drive) {
        Ok(c) => lines.push(
            json!({
                "record": "mollow_coefficients",
                "eta_per_ns": c.eta,
                "mu_rad_per_ns": c.mu,
                "a_printed": c.a_coef,
                "a_standard": c.a_standard(),
                "b": c.b_coef,
                "n_inf": c.n_inf,
                "rabi_ghz": drive.rabi_ghz(),
                "detuning_ghz": drive.detuning_ghz(),
            })
            .to_string(),
        ),
        Err(e) => lines.push(
            json!({"record": "mollow_coefficients", "error": e.to_string()}).to_string(),
        ),
    }
    let (lo, hi, ray) = sideband_positions(&drive);
    lines.push(
        json!({"record": "sideband_positions", "lower_ghz": lo, "upper_ghz": hi, "rayleigh_ghz": ray})
            .to_string(),
    );
    std::fs::write(&sidecar, lines.join("\n") + "\n").map_err(Failure::io)?;
    Ok(())
}

fn write_spectrum_csv(out: &Path, trace: &SpectrumTrace<f64>, what: &str) -> Result<(), Failure> {
    let rows: Vec<Vec<f64>> = trace
        .offsets_ghz()
        .iter()
        .zip(trace.intensities())
        .map(|(&w, &s)| vec![w, s])
        .collect();
    write_csv(
        out,
        &format!("{what}; offsets cyclic GHz from the bare emitter resonance, intensity per rad/ns"),
        &["offset_ghz", "intensity"],
        &rows,
    )
    .map_err(Failure::io)
}

fn write_trace_csv(
    out: &Path,
    trace: &CorrelationTrace<f64>,
    what: &str,
    value_name: &str,
) -> Result<(), Failure> {
    let rows: Vec<Vec<f64>> = trace.iter().map(|(t, v)| vec![t, v]).collect();
    write_csv(out, &format!("{what}; delays in ps"), &["tau_ps", value_name], &rows)
        .map_err(Failure::io)
}

fn cmd_g2(
    scenario: &Path,
    instrumented: bool,
    numeric: bool,
    span_ps: f64,
    points: usize,
    out: &Path,
) -> Result<(), Failure> {
    let sc = load(scenario)?;
    let emitter = sc.emitter().map_err(|e| Failure::usage(e.to_string()))?;
    let drive = sc.drive().map_err(|e| Failure::usage(e.to_string()))?;
    let taus = grid_ps(span_ps, points)?;
    let mut trace = if numeric {
        // the numeric route is one-sided in τ; mirror onto the signed grid
        let half: Vec<f64> = taus.iter().copied().filter(|&t| t >= 0.0).collect();
        let one_sided = g2_regression(&emitter, &drive, &half).map_err(Failure::from_lib)?;
        mirror_trace(&taus, &one_sided)
    } else {
        g2_closed(&emitter, &drive, &taus).map_err(Failure::from_lib)?
    };
    if instrumented {
        let instr = sc.instrument().map_err(|e| Failure::usage(e.to_string()))?;
        let rho = sc.signal_fraction().map_err(|e| Failure::usage(e.to_string()))?;
        trace = convolve_irf(&trace, instr.irf_fwhm_ps).map_err(Failure::from_lib)?;
        trace = add_background_g2(&trace, rho).map_err(Failure::from_lib)?;
    }
    write_trace_csv(out, &trace, "second-order correlation", "g2")
}

fn mirror_trace(taus: &[f64], one_sided: &CorrelationTrace<f64>) -> CorrelationTrace<f64> {
    let values: Vec<f64> = taus
        .iter()
        .map(|&t| {
            let at = t.abs();
            let pos = one_sided
                .taus_ps()
                .iter()
                .position(|&x| (x - at).abs() < 1e-9)
                .expect("mirrored grid point present");
            one_sided.values()[pos]
        })
        .collect();
    CorrelationTrace::new(taus.to_vec(), values, one_sided.kind()).expect("valid mirrored trace")
}

fn cmd_g1(
    scenario: &Path,
    instrumented: bool,
    numeric: bool,
    span_ps: f64,
    points: usize,
    out: &Path,
) -> Result<(), Failure> {
    let sc = load(scenario)?;
    let emitter = sc.emitter().map_err(|e| Failure::usage(e.to_string()))?;
    let drive = sc.drive().map_err(|e| Failure::usage(e.to_string()))?;
    let taus = grid_ps(span_ps, points)?;
    let mut trace = if numeric {
        let half: Vec<f64> = taus.iter().copied().filter(|&t| t >= 0.0).collect();
        let one_sided = g1_incoh_regression(&emitter, &drive, &half).map_err(Failure::from_lib)?;
        mirror_trace(&taus, &one_sided)
    } else {
        g1_incoh_closed(&emitter, &drive, &taus).map_err(Failure::from_lib)?
    };
    if instrumented {
        let instr = sc.instrument().map_err(|e| Failure::usage(e.to_string()))?;
        trace = convolve_irf(&trace, instr.irf_fwhm_ps).map_err(Failure::from_lib)?;
    }
    write_trace_csv(out, &trace, "incoherent first-order coherence (normalized)", "g1_incoh")
}

fn cmd_cascade(
    scenario: &Path,
    instrumented: bool,
    span_ps: f64,
    points: usize,
    out: &Path,
) -> Result<(), Failure> {
    let sc = load(scenario)?;
    let model = sc.cascade().map_err(|e| Failure::usage(e.to_string()))?;
    let taus = grid_ps(span_ps, points)?;
    let mut trace = cascade_cross_correlation(&model, &taus).map_err(Failure::from_lib)?;
    if instrumented {
        let instr = sc.instrument().map_err(|e| Failure::usage(e.to_string()))?;
        let rho = sc.signal_fraction().map_err(|e| Failure::usage(e.to_string()))?;
        trace = convolve_irf(&trace, instr.irf_fwhm_ps).map_err(Failure::from_lib)?;
        trace = add_background_g2(&trace, rho).map_err(Failure::from_lib)?;
    }
    write_trace_csv(out, &trace, "sideband cascade cross-correlation", "g")
}

fn cmd_fit(
    kind: FitKind,
    data_path: &Path,
    out: &Path,
    scenario: Option<&Path>,
    fit_irf: bool,
    max_iterations: Option<usize>,
) -> Result<(), Failure> {
    let scenario = match scenario {
        Some(p) => Some(load(p)?),
        None => None,
    };
    let need_scenario = |what: &str| -> Result<&Scenario, Failure> {
        scenario
            .as_ref()
            .ok_or_else(|| Failure::usage(format!("fit kind `{what}` requires --scenario")))
    };
    let _ = max_iterations; // threaded through the fits below where supported

    let (result, extra): (FitResult<f64>, serde_json::Value) = match kind {
        FitKind::Saturation => {
            let data = data_series_from_csv(data_path).map_err(Failure::usage)?;
            let eta_sys = match &scenario {
                Some(sc) => sc.saturation().map(|p| p.eta_sys).unwrap_or(0.03),
                None => 0.03,
            };
            let r = fit_saturation(&data, eta_sys).map_err(Failure::from_lib)?;
            (r, json!({"kind": "saturation", "eta_sys_fixed": eta_sys}))
        }
        FitKind::Lifetime => {
            let data = data_series_from_csv(data_path).map_err(Failure::usage)?;
            let irf = match &scenario {
                Some(sc) => sc.instrument().map(|i| i.irf_fwhm_ps).unwrap_or(40.0),
                None => 40.0,
            };
            let r = fit_lifetime(&data, irf).map_err(Failure::from_lib)?;
            (r, json!({"kind": "lifetime", "irf_fwhm_ps_fixed": irf}))
        }
        FitKind::Spectrum => {
            let sc = need_scenario("spectrum")?;
            let emitter = sc.emitter().map_err(|e| Failure::usage(e.to_string()))?;
            let (_, rows) = crate::output::read_csv(data_path).map_err(Failure::usage)?;
            let offsets: Vec<f64> = rows.iter().map(|r| ghz_to_rad_ns(r[0])).collect();
            let intensities: Vec<f64> = rows.iter().map(|r| r[1]).collect();
            let spec = SpectrumTrace::new(offsets, intensities, SpectrumMode::Standard)
                .map_err(Failure::from_lib)?;
            let r = fit_spectrum_rabi(&spec, &emitter).map_err(Failure::from_lib)?;
            (r, json!({"kind": "spectrum"}))
        }
        FitKind::G2 => {
            let sc = need_scenario("g2")?;
            let emitter = sc.emitter().map_err(|e| Failure::usage(e.to_string()))?;
            let instr = sc.instrument().map_err(|e| Failure::usage(e.to_string()))?;
            let data = data_series_from_csv(data_path).map_err(Failure::usage)?;
            let r = fit_g2(
                &data,
                &emitter,
                FitG2Options { irf_fwhm_ps: instr.irf_fwhm_ps, fit_irf },
            )
            .map_err(Failure::from_lib)?;
            (r, json!({"kind": "g2", "irf_fwhm_ps": instr.irf_fwhm_ps, "irf_fitted": fit_irf}))
        }
        FitKind::Visibility => {
            let sc = need_scenario("visibility")?;
            let template = sc.visibility_model().map_err(|e| Failure::usage(e.to_string()))?;
            let data = data_series_from_csv(data_path).map_err(Failure::usage)?;
            let r = fit_visibility(&data, &template).map_err(Failure::from_lib)?;
            (r, json!({"kind": "visibility"}))
        }
        FitKind::Cascade => {
            let data = data_series_from_csv(data_path).map_err(Failure::usage)?;
            let r = fit_cascade(&data).map_err(Failure::from_lib)?;
            let order = match r.order {
                CascadeOrder::THeraldsF => "t_heralds_f",
                CascadeOrder::FHeraldsT => "f_heralds_t",
            };
            (r.result, json!({"kind": "cascade", "order": order}))
        }
    };

    // iteration-budget override flags non-convergence for testing and for
    // deliberately truncated fits
    let result = match max_iterations {
        Some(budget) if result.n_iterations > budget => {
            let mut r = result;
            r.converged = false;
            r.warnings.push(format!(
                "iteration budget {budget} exceeded ({} used)",
                r.n_iterations
            ));
            r
        }
        _ => result,
    };

    write_json(out, &fit_result_json(&result, extra)).map_err(Failure::io)?;
    if !result.converged {
        return Err(Failure {
            code: 3,
            message: "fit did not converge".into(),
            machine: Some(json!({"error": "NonConvergence", "out": out.display().to_string()})),
        });
    }
    Ok(())
}

fn cmd_mc(
    scenario: &Path,
    duration_ms: f64,
    efficiency: f64,
    seed: u64,
    tags_path: &Path,
) -> Result<(), Failure> {
    let sc = load(scenario)?;
    let emitter = sc.emitter().map_err(|e| Failure::usage(e.to_string()))?;
    let drive = sc.drive().map_err(|e| Failure::usage(e.to_string()))?;
    if !(duration_ms > 0.0) {
        return Err(Failure::usage("duration_ms must be > 0"));
    }
    let duration_ps = (duration_ms * 1e9).round() as u64;
    let stream =
        simulate_stream(&emitter, &drive, duration_ps, efficiency, seed).map_err(Failure::from_lib)?;
    let is_csv = tags_path.extension().map(|e| e == "csv").unwrap_or(false);
    if is_csv {
        tags::write_tags_csv(tags_path, &stream).map_err(Failure::from_lib)?;
    } else {
        tags::write_tags_binary(tags_path, &stream).map_err(Failure::from_lib)?;
    }
    eprintln!(
        "{}",
        json!({"tags": stream.len(), "duration_ps": stream.duration_ps(), "rate_per_ns": stream.rate_per_ns()})
    );
    Ok(())
}

fn cmd_correlate(
    tags_path: &Path,
    tags_b: Option<&Path>,
    bin_ps: u64,
    max_tau_ps: u64,
    normalization: NormArg,
    out: &Path,
) -> Result<(), Failure> {
    let stream = tags::read_tags_auto(tags_path).map_err(Failure::from_lib)?;
    let norm = match normalization {
        NormArg::Baseline => Normalization::Baseline,
        NormArg::Raw => Normalization::Raw,
    };
    let cfg = CorrelogramConfig::new(bin_ps, max_tau_ps, norm).map_err(Failure::from_lib)?;
    let trace = match tags_b {
        Some(b) => {
            let other = tags::read_tags_auto(b).map_err(Failure::from_lib)?;
            cross_correlate(&stream, &other, &cfg).map_err(Failure::from_lib)?
        }
        None => correlate(&stream, &cfg).map_err(Failure::from_lib)?,
    };
    write_trace_csv(out, &trace, "time-tag correlogram", "g2")
}

fn reference_emitter() -> EmitterParams<f64> {
    EmitterParams::from_ps(56.8, 103.5).expect("reference emitter")
}

fn manifest_entry(name: &str, columns: &[&str], model: &str, params: serde_json::Value) -> serde_json::Value {
    json!({"file": name, "columns": columns, "model": model, "parameters": params})
}

fn cmd_reproduce(figure: FigureId, out_dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(out_dir).map_err(Failure::io)?;
    let mut files = Vec::new();
    let figure_name;

    match figure {
        FigureId::Fig2 => {
            figure_name = "fig2";
            // count-rate curve from the reference saturation constants and
            // the derived linear laser background
            let p = SaturationParams::new(2.716, 0.125, 0.03).expect("reference constants");
            let instr = mollow::instrument::InstrumentModel::new(40.0, 15.0, 8.0, 0.0089, 0.03)
                .expect("reference instrument");
            let cal = FluxCalibration::new(911.55, 56.8).expect("reference calibration");
            let rows: Vec<Vec<f64>> = (0..81)
                .map(|k| {
                    let n = 10f64.powf(-2.0 + k as f64 * 0.05); // 0.01 .. 100
                    let (total, _bg, qd) = detected_counts(&p, &instr, &cal, n).expect("valid flux");
                    vec![n, total, qd]
                })
                .collect();
            let name = "count_rate.csv";
            write_csv(
                &out_dir.join(name),
                "detected count rate vs incident flux; rates in MHz",
                &["n_bar", "total_mhz", "qd_mhz"],
                &rows,
            )
            .map_err(Failure::io)?;
            files.push(manifest_entry(
                name,
                &["n_bar", "total_mhz", "qd_mhz"],
                "saturation law with linear background",
                json!({"s_sat_ghz": 2.716, "n0": 0.125, "eta_sys": 0.03,
                       "background_reflectivity": 0.0089, "wavelength_nm": 911.55, "t1_ps": 56.8}),
            ));
        }
        FigureId::Fig3a => {
            figure_name = "fig3a";
            let emitter = reference_emitter();
            let instr = mollow::instrument::InstrumentModel::new(40.0, 15.0, 8.0, 0.0089, 0.03)
                .expect("reference instrument");
            for n_bar in [1.2, 2.4, 4.8, 9.6] {
                let rabi: f64 = rabi_from_flux(2.582, n_bar).expect("flux");
                let drive = DriveParams::from_ghz(rabi, 0.0).expect("drive");
                let span = ghz_to_rad_ns((5.0 * rabi).max(12.0));
                let n_points = (2.0 * span / 0.045).ceil() as usize | 1;
                let offsets = linspace(-span, span, n_points);
                let spec = spectrum_closed(&emitter, &drive, &offsets, SpectrumMode::Standard)
                    .map_err(Failure::from_lib)?;
                // coherent laser line through the scanning filter
                let (ss, _) = steady_state(&emitter, &drive);
                let coherent_power = (ss.u * ss.u + ss.v * ss.v) / 4.0;
                let filtered = fp_filter_spectrum_with_spike(&spec, &instr, coherent_power, 0.0)
                    .map_err(Failure::from_lib)?;
                let rows: Vec<Vec<f64>> = spec
                    .offsets_ghz()
                    .iter()
                    .zip(spec.intensities().iter().zip(filtered.intensities()))
                    .map(|(&w, (&s, &f))| vec![w, s, f])
                    .collect();
                let name = format!("spectrum_nbar_{n_bar}.csv");
                write_csv(
                    &out_dir.join(&name),
                    "emission spectrum; offsets cyclic GHz; `filtered` adds the scanning-cavity line and coherent spike",
                    &["offset_ghz", "intensity", "intensity_filtered"],
                    &rows,
                )
                .map_err(Failure::io)?;
                files.push(manifest_entry(
                    &name,
                    &["offset_ghz", "intensity", "intensity_filtered"],
                    "closed-form spectrum, standard mode + scanning-filter convolution with coherent spike",
                    json!({"t1_ps": 56.8, "t2_ps": 103.5, "n_bar": n_bar,
                           "rabi_ghz": rabi, "rabi_coefficient_ghz": 2.582,
                           "fp_linewidth_mhz": 15.0, "coherent_spike_power": coherent_power}),
                ));
            }
        }
        FigureId::Fig3d => {
            figure_name = "fig3d";
            let emitter = reference_emitter();
            let rho: f64 = 50.0 / 51.0;
            let irf = 40.0;
            for n_bar in [1.2, 2.4, 4.8, 7.2] {
                let rabi = rabi_from_flux(2.582, n_bar).expect("flux");
                let drive = DriveParams::from_ghz(rabi, 0.0).expect("drive");
                let taus = linspace(-800.0, 800.0, 801);
                let ideal = g2_closed(&emitter, &drive, &taus).map_err(Failure::from_lib)?;
                let smeared = convolve_irf(&ideal, irf).map_err(Failure::from_lib)?;
                let instrumented = add_background_g2(&smeared, rho).map_err(Failure::from_lib)?;
                let unmixed = remove_background_g2(&instrumented, rho).map_err(Failure::from_lib)?;
                let recovered = deconvolve_irf(&unmixed, irf, None).map_err(Failure::from_lib)?;
                let rows: Vec<Vec<f64>> = taus
                    .iter()
                    .enumerate()
                    .map(|(i, &t)| {
                        vec![
                            t,
                            ideal.values()[i],
                            instrumented.values()[i],
                            recovered.values()[i],
                        ]
                    })
                    .collect();
                let name = format!("g2_nbar_{n_bar}.csv");
                write_csv(
                    &out_dir.join(&name),
                    "g2 processing chain: ideal, instrumented (IRF + background), recovered (subtraction + deconvolution)",
                    &["tau_ps", "g2_ideal", "g2_instrumented", "g2_recovered"],
                    &rows,
                )
                .map_err(Failure::io)?;
                files.push(manifest_entry(
                    &name,
                    &["tau_ps", "g2_ideal", "g2_instrumented", "g2_recovered"],
                    "ideal-emitter g2 through background mixing and IRF smearing, then inverted",
                    json!({"t1_ps": 56.8, "t2_ps": 103.5, "n_bar": n_bar, "rabi_ghz": rabi,
                           "signal_fraction": rho, "irf_fwhm_ps": irf}),
                ));
            }
        }
        FigureId::Fig4a => {
            figure_name = "fig4a";
            let rows: Vec<Vec<f64>> = [-6.6, -5.0, -3.5, -2.0, -1.0, 0.0, 1.0, 2.0, 3.5, 5.3]
                .iter()
                .map(|&det| {
                    let drive = DriveParams::from_ghz(4.0, det).expect("drive");
                    let (lo, hi, ray) = sideband_positions(&drive);
                    vec![det, lo, hi, ray]
                })
                .collect();
            let name = "sideband_positions.csv";
            write_csv(
                &out_dir.join(name),
                "triplet line offsets vs laser detuning at a 4 GHz drive; all cyclic GHz",
                &["detuning_ghz", "lower_ghz", "upper_ghz", "rayleigh_ghz"],
                &rows,
            )
            .map_err(Failure::io)?;
            files.push(manifest_entry(
                name,
                &["detuning_ghz", "lower_ghz", "upper_ghz", "rayleigh_ghz"],
                "dressed-state geometry: rayleigh at the detuning, sidebands at detuning ∓ sqrt(rabi² + detuning²)",
                json!({"rabi_ghz": 4.0, "n_bar": 2.4}),
            ));
        }
        FigureId::Fig4b => {
            figure_name = "fig4b";
            let taus = linspace(-600.0, 600.0, 1201);
            let blue = CascadeModel::new(57.8, 91.8, 0.8, CascadeOrder::THeraldsF)
                .map_err(Failure::from_lib)?;
            let red = CascadeModel::new(42.9, 95.1, 0.8, CascadeOrder::FHeraldsT)
                .map_err(Failure::from_lib)?;
            let b = cascade_cross_correlation(&blue, &taus).map_err(Failure::from_lib)?;
            let r = cascade_cross_correlation(&red, &taus).map_err(Failure::from_lib)?;
            let rows: Vec<Vec<f64>> = taus
                .iter()
                .enumerate()
                .map(|(i, &t)| vec![t, b.values()[i], r.values()[i]])
                .collect();
            let name = "cascade_cross_correlation.csv";
            write_csv(
                &out_dir.join(name),
                "sideband cross-correlation for blue (+5.3 GHz) and red (-6.6 GHz) detuning; amplitudes are fit parameters, not predictions",
                &["tau_ps", "g_blue_detuned", "g_red_detuned"],
                &rows,
            )
            .map_err(Failure::io)?;
            files.push(manifest_entry(
                name,
                &["tau_ps", "g_blue_detuned", "g_red_detuned"],
                "two-exponential asymmetric bunching",
                json!({"blue": {"tau_rise_ps": 57.8, "tau_fall_ps": 91.8, "order": "t_heralds_f"},
                       "red": {"tau_rise_ps": 42.9, "tau_fall_ps": 95.1, "order": "f_heralds_t"},
                       "amplitude": 0.8}),
            ));
        }
        FigureId::FigS2 => {
            figure_name = "figS2";
            let emitter = reference_emitter();
            let drive = DriveParams::from_ghz(4.0, 0.0).expect("drive");
            let model = mollow::correlations::VisibilityModel::new(0.45, 3.2e3, emitter, drive)
                .map_err(Failure::from_lib)?;
            let delays = linspace(0.0, 2000.0, 401);
            let v = visibility(&model, &delays).map_err(Failure::from_lib)?;
            let rows: Vec<Vec<f64>> = v.iter().map(|(t, val)| vec![t, val]).collect();
            let name = "visibility.csv";
            write_csv(
                &out_dir.join(name),
                "first-order interference visibility vs interferometer delay",
                &["delay_ps", "visibility"],
                &rows,
            )
            .map_err(Failure::io)?;
            files.push(manifest_entry(
                name,
                &["delay_ps", "visibility"],
                "laser-coherence plateau plus incoherent emitter coherence",
                json!({"t1_ps": 56.8, "t2_ps": 103.5, "rabi_ghz": 4.0,
                       "coherent_fraction": 0.45, "laser_coherence_time_us": 3.2}),
            ));
        }
    }

    let manifest = json!({
        "figure": figure_name,
        "files": files,
        "generated_unix_seconds": SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    });
    write_json(&out_dir.join("manifest.json"), &manifest).map_err(Failure::io)?;
    Ok(())
}

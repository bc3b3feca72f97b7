//! Scenario configuration: flat `key = value` pairs under `[section]`
//! headers, `#` comments. Parsing is strict — unknown sections or keys are
//! rejected with their line number, and every failed lookup names the
//! missing field. All frequencies are cyclic (GHz), durations in ps unless
//! the key says otherwise.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use mollow::bloch::{DriveParams, EmitterParams};
use mollow::correlations::VisibilityModel;
use mollow::instrument::{flux_from_power, FluxCalibration, InstrumentModel, SaturationParams};
use mollow::mollow::rabi_from_flux;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

const KNOWN: &[(&str, &[&str])] = &[
    ("emitter", &["t1_ps", "t2_ps"]),
    (
        "drive",
        &["rabi_ghz", "detuning_ghz", "n_bar", "rabi_coefficient_ghz"],
    ),
    (
        "instrument",
        &[
            "irf_fwhm_ps",
            "fp_linewidth_mhz",
            "grating_bandwidth_ghz",
            "background_reflectivity",
            "detection_efficiency",
        ],
    ),
    ("calibration", &["wavelength_nm", "power_nw"]),
    ("saturation", &["s_sat_ghz", "n0", "eta_sys"]),
    (
        "cascade",
        &["tau_rise_ps", "tau_fall_ps", "amplitude", "order"],
    ),
    (
        "visibility",
        &["coherent_fraction", "laser_coherence_time_us"],
    ),
    ("background", &["signal_fraction"]),
];

/// Parsed scenario: raw typed lookups plus constructors for the library
/// parameter types.
#[derive(Debug, Default)]
pub struct Scenario {
    values: BTreeMap<(String, String), String>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError(format!("line {lineno}: unterminated section header")))?
                    .trim()
                    .to_string();
                if !KNOWN.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError(format!(
                        "line {lineno}: unknown section [{name}]"
                    )));
                }
                section = Some(name);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!("line {lineno}: expected `key = value`, got {line:?}"))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            let sec = section
                .clone()
                .ok_or_else(|| ConfigError(format!("line {lineno}: key outside any [section]")))?;
            let allowed = KNOWN.iter().find(|(s, _)| *s == sec).map(|(_, ks)| *ks).unwrap();
            if !allowed.contains(&key.as_str()) {
                return Err(ConfigError(format!(
                    "line {lineno}: unknown key `{key}` in [{sec}]"
                )));
            }
            if values.insert((sec.clone(), key.clone()), value).is_some() {
                return Err(ConfigError(format!(
                    "line {lineno}: duplicate key `{key}` in [{sec}]"
                )));
            }
        }
        Ok(Self { values })
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(|s| s.as_str())
    }

    fn require_f64(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        let raw = self.get(section, key).ok_or_else(|| {
            ConfigError(format!("missing required field `{key}` in [{section}]"))
        })?;
        raw.parse::<f64>()
            .map_err(|_| ConfigError(format!("field `{key}` in [{section}]: not a number: {raw:?}")))
    }

    fn optional_f64(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|_| ConfigError(format!("field `{key}` in [{section}]: not a number: {raw:?}"))),
        }
    }

    pub fn emitter(&self) -> Result<EmitterParams<f64>, ConfigError> {
        let t1 = self.require_f64("emitter", "t1_ps")?;
        let t2 = self.require_f64("emitter", "t2_ps")?;
        EmitterParams::from_ps(t1, t2).map_err(|e| ConfigError(e.to_string()))
    }

    /// Drive strength, by decreasing directness: `rabi_ghz`; or incident
    /// flux `n_bar` with `rabi_coefficient_ghz` (Ω/2π = k√n̄); or excitation
    /// power via `[calibration]` (power → n̄ → Ω). Exactly one route must be
    /// configured.
    pub fn drive(&self) -> Result<DriveParams<f64>, ConfigError> {
        let detuning = self.optional_f64("drive", "detuning_ghz")?.unwrap_or(0.0);
        let direct = self.optional_f64("drive", "rabi_ghz")?;
        let n_bar = self.optional_f64("drive", "n_bar")?;
        let coeff = self.optional_f64("drive", "rabi_coefficient_ghz")?;
        let power = self.optional_f64("calibration", "power_nw")?;
        let rabi = match (direct, n_bar, coeff, power) {
            (Some(r), None, None, None) => r,
            (None, Some(n), Some(k), None) => {
                rabi_from_flux(k, n).map_err(|e| ConfigError(e.to_string()))?
            }
            (None, None, Some(k), Some(p)) => {
                let n = flux_from_power(&self.calibration()?, p)
                    .map_err(|e| ConfigError(e.to_string()))?;
                rabi_from_flux(k, n).map_err(|e| ConfigError(e.to_string()))?
            }
            (None, None, None, None) => {
                return Err(ConfigError(
                    "missing required field `rabi_ghz` (or `n_bar`/`power_nw` + `rabi_coefficient_ghz`) in [drive]"
                        .into(),
                ))
            }
            _ => {
                return Err(ConfigError(
                    "[drive] must set exactly one of: `rabi_ghz`; `n_bar` + `rabi_coefficient_ghz`; [calibration] power_nw + `rabi_coefficient_ghz`"
                        .into(),
                ))
            }
        };
        DriveParams::from_ghz(rabi, detuning).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn instrument(&self) -> Result<InstrumentModel<f64>, ConfigError> {
        InstrumentModel::new(
            self.optional_f64("instrument", "irf_fwhm_ps")?.unwrap_or(40.0),
            self.optional_f64("instrument", "fp_linewidth_mhz")?.unwrap_or(15.0),
            self.optional_f64("instrument", "grating_bandwidth_ghz")?.unwrap_or(8.0),
            self.optional_f64("instrument", "background_reflectivity")?.unwrap_or(0.0089),
            self.optional_f64("instrument", "detection_efficiency")?.unwrap_or(0.03),
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn calibration(&self) -> Result<FluxCalibration<f64>, ConfigError> {
        let wavelength = self.require_f64("calibration", "wavelength_nm")?;
        let t1 = self.require_f64("emitter", "t1_ps")?;
        FluxCalibration::new(wavelength, t1).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn saturation(&self) -> Result<SaturationParams<f64>, ConfigError> {
        SaturationParams::new(
            self.require_f64("saturation", "s_sat_ghz")?,
            self.require_f64("saturation", "n0")?,
            self.require_f64("saturation", "eta_sys")?,
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn cascade(&self) -> Result<mollow::correlations::CascadeModel<f64>, ConfigError> {
        use mollow::correlations::{CascadeModel, CascadeOrder};
        let order = match self.get("cascade", "order").unwrap_or("t_heralds_f") {
            "t_heralds_f" => CascadeOrder::THeraldsF,
            "f_heralds_t" => CascadeOrder::FHeraldsT,
            other => {
                return Err(ConfigError(format!(
                    "field `order` in [cascade]: expected t_heralds_f or f_heralds_t, got {other:?}"
                )))
            }
        };
        CascadeModel::new(
            self.require_f64("cascade", "tau_rise_ps")?,
            self.require_f64("cascade", "tau_fall_ps")?,
            self.optional_f64("cascade", "amplitude")?.unwrap_or(1.0),
            order,
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn visibility_model(&self) -> Result<VisibilityModel<f64>, ConfigError> {
        let coherent = self.optional_f64("visibility", "coherent_fraction")?.unwrap_or(0.5);
        let laser_us = self
            .optional_f64("visibility", "laser_coherence_time_us")?
            .unwrap_or(3.2);
        VisibilityModel::new(coherent, laser_us * 1e3, self.emitter()?, self.drive()?)
            .map_err(|e| ConfigError(e.to_string()))
    }

    /// Signal fraction ρ for instrumented g² traces (counts from the emitter
    /// over total counts); default from a signal:background ratio of 50.
    pub fn signal_fraction(&self) -> Result<f64, ConfigError> {
        Ok(self
            .optional_f64("background", "signal_fraction")?
            .unwrap_or(50.0 / 51.0))
    }
}

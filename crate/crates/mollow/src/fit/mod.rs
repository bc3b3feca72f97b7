//! Nonlinear least-squares parameter recovery for every curve the toolkit
//! models: saturation, lifetime, spectrum, g², visibility, and the sideband
//! cascade. Each fit couples a deterministic initialization heuristic to the
//! damped Gauss–Newton engine in [`lm`] and reports named parameters with
//! standard errors.

pub mod lm;
mod models;

pub use lm::{LmOptions, LmOutcome};
pub use models::{
    fit_cascade, fit_g2, fit_lifetime, fit_saturation, fit_spectrum_rabi, fit_visibility,
    CascadeFit, FitG2Options,
};

use crate::error::{Error, Result};
use crate::float::Real;

/// An (x, y) data set with optional per-point uncertainties.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSeries<T: Real> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub y_err: Option<Vec<T>>,
}

impl<T: Real> DataSeries<T> {
    pub fn new(x: Vec<T>, y: Vec<T>, y_err: Option<Vec<T>>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DegenerateData(format!(
                "length mismatch: {} x vs {} y",
                x.len(),
                y.len()
            )));
        }
        if let Some(e) = &y_err {
            if e.len() != y.len() {
                return Err(Error::DegenerateData("y_err length mismatch".into()));
            }
            if e.iter().any(|&s| !(s > T::zero())) {
                return Err(Error::DegenerateData("y_err must be positive".into()));
            }
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::DegenerateData("non-finite data".into()));
        }
        Ok(Self { x, y, y_err })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Per-point weights 1/σ: explicit errors when given, else the supplied
    /// default weighting.
    fn weights(&self, default: Weighting) -> Vec<T> {
        match (&self.y_err, default) {
            (Some(e), _) => e.iter().map(|&s| s.recip()).collect(),
            (None, Weighting::Poisson) => self
                .y
                .iter()
                .map(|&y| y.max(T::one()).sqrt().recip())
                .collect(),
            (None, Weighting::Unweighted) => vec![T::one(); self.len()],
        }
    }
}

/// Default weighting when the data carries no explicit uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// 1/√counts — for raw count data.
    Poisson,
    /// Unit weights — for normalized traces.
    Unweighted,
}

/// Estimated parameters with uncertainties and convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T: Real> {
    /// (name, value), in a stable order.
    pub params: Vec<(String, T)>,
    /// (name, 1σ), present only when the Jacobian had full rank.
    pub std_errors: Option<Vec<(String, T)>>,
    pub residual_norm: T,
    pub n_iterations: usize,
    pub converged: bool,
    /// Non-fatal diagnostics (under-constrained parameters, short tails, ...).
    pub warnings: Vec<String>,
}

impl<T: Real> FitResult<T> {
    pub(crate) fn from_outcome(outcome: &LmOutcome<T>, names: &[&str]) -> Self {
        let params = names
            .iter()
            .zip(&outcome.params)
            .map(|(&n, &v)| (n.to_string(), v))
            .collect();
        let std_errors = outcome.std_errors.as_ref().map(|es| {
            names
                .iter()
                .zip(es)
                .map(|(&n, &e)| (n.to_string(), e))
                .collect()
        });
        Self {
            params,
            std_errors,
            residual_norm: outcome.residual_norm,
            n_iterations: outcome.n_iterations,
            converged: outcome.converged,
            warnings: Vec::new(),
        }
    }

    pub fn param(&self, name: &str) -> Option<T> {
        self.params.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn std_err(&self, name: &str) -> Option<T> {
        self.std_errors
            .as_ref()
            .and_then(|es| es.iter().find(|(n, _)| n == name).map(|&(_, v)| v))
    }

    pub(crate) fn rename(mut self, from: &str, to: &str) -> Self {
        for (n, _) in self.params.iter_mut() {
            if n == from {
                *n = to.to_string();
            }
        }
        if let Some(es) = self.std_errors.as_mut() {
            for (n, _) in es.iter_mut() {
                if n == from {
                    *n = to.to_string();
                }
            }
        }
        self
    }

    pub(crate) fn push_param(&mut self, name: &str, value: T, err: Option<T>) {
        self.params.push((name.to_string(), value));
        if let (Some(es), Some(e)) = (self.std_errors.as_mut(), err) {
            es.push((name.to_string(), e));
        }
    }
}

//! Ensemble-size sweeps and power-law fits.
//!
//! A sweep rebuilds one model family at several ensemble sizes `N`, extracts a
//! scalar metric from each run, and fits `metric = c · N^p` by least squares in
//! log-log space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{dominant_angular_frequency, evolve, EvolutionRequest, Method, NoiseKind, Trajectory};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::statespace::Reduction;

/// Largest `N` run in a full-tensor basis.
pub const FULL_TENSOR_N_CAP: usize = 15;
/// Largest `N` run in a collective-spin basis.
pub const COLLECTIVE_N_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// First time the stored energy reaches half its run maximum.
    ChargingHalfTime,
    /// First time the acceptor population reaches half its run maximum.
    TransferHalfTime,
    /// `−d ln P/dt` regressed over the first e-fold of the excitation.
    InitialDecayRate,
    /// Dominant angular frequency of the observable record.
    OscillationFrequency,
    /// Acceptor population at `t_max`.
    ShortTimeTransfer,
}

impl Metric {
    pub fn default_observable(self) -> &'static str {
        match self {
            Metric::ChargingHalfTime => "stored_energy",
            Metric::TransferHalfTime | Metric::ShortTimeTransfer => "acceptor_population",
            Metric::InitialDecayRate => "excitation",
            Metric::OscillationFrequency => "photon_number",
        }
    }
}

/// One sweep: the template request is re-instantiated at every `N`.
///
/// The template's basis is ignored; each run uses the model's canonical basis
/// in the collective reduction when the request allows it, otherwise the full
/// tensor product. Driven families always run with `adaptive_rk`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRequest {
    pub template: EvolutionRequest,
    pub n_values: Vec<usize>,
    pub metric: Metric,
    /// Overrides the metric's default observable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
    /// Forces a reduction instead of the automatic choice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<Reduction>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "sqrt_N")]
    SqrtN,
    #[serde(rename = "linear_N")]
    LinearN,
    #[serde(rename = "N_squared")]
    NSquared,
    #[serde(rename = "other")]
    Other,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::SqrtN => "sqrt_N",
            Classification::LinearN => "linear_N",
            Classification::NSquared => "N_squared",
            Classification::Other => "other",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// `(N, metric)` in increasing `N`.
    pub samples: Vec<(usize, f64)>,
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub r_squared: f64,
    /// `c` in `metric = c · N^p`.
    pub prefactor: f64,
}

/// JSON summary of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub family: String,
    pub metric: Metric,
    pub n_values: Vec<usize>,
    pub values: Vec<f64>,
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub r_squared: f64,
    pub prefactor: f64,
    pub label: Classification,
}

impl SweepSummary {
    pub fn new(req: &SweepRequest, fit: &ScalingFit) -> Self {
        Self {
            family: req.template.model.family().to_owned(),
            metric: req.metric,
            n_values: fit.samples.iter().map(|s| s.0).collect(),
            values: fit.samples.iter().map(|s| s.1).collect(),
            exponent: fit.exponent,
            exponent_stderr: fit.exponent_stderr,
            r_squared: fit.r_squared,
            prefactor: fit.prefactor,
            label: classify_exponent(fit),
        }
    }
}

/// Least-squares slope of `ln y` against `ln N`.
pub fn fit_power_law(samples: &[(usize, f64)]) -> Result<ScalingFit> {
    let mut samples = samples.to_vec();
    samples.sort_by_key(|s| s.0);
    let distinct = {
        let mut ns: Vec<usize> = samples.iter().map(|s| s.0).collect();
        ns.dedup();
        ns.len()
    };
    if distinct < 3 {
        return Err(Error::InvalidArgument(format!(
            "a power-law fit needs at least 3 distinct N, got {distinct}"
        )));
    }
    if let Some(&(n, v)) = samples.iter().find(|s| s.0 == 0 || !(s.1 > 0.0) || !s.1.is_finite()) {
        return Err(Error::Metric(format!("non-positive sample ({n}, {v}) cannot be fitted in log space")));
    }
    let m = samples.len() as f64;
    let x: Vec<f64> = samples.iter().map(|s| (s.0 as f64).ln()).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let syy: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    let exponent_stderr = if samples.len() > 2 {
        (ss_res / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(ScalingFit {
        samples,
        exponent: slope,
        exponent_stderr,
        r_squared,
        prefactor: intercept.exp(),
    })
}

/// Nearest of `{½, 1, 2}` in `|exponent|` within 0.15, provided `r² ≥ 0.98`.
///
/// The magnitude is used so that time-like metrics (which fall as `N^−p`)
/// classify alongside rates.
pub fn classify_exponent(fit: &ScalingFit) -> Classification {
    const TOL: f64 = 0.15;
    const MIN_R2: f64 = 0.98;
    if fit.r_squared < MIN_R2 {
        return Classification::Other;
    }
    let p = fit.exponent.abs();
    [
        (0.5, Classification::SqrtN),
        (1.0, Classification::LinearN),
        (2.0, Classification::NSquared),
    ]
    .into_iter()
    .map(|(target, c)| ((p - target).abs(), c))
    .filter(|(d, _)| *d <= TOL)
    .min_by(|a, b| a.0.total_cmp(&b.0))
    .map_or(Classification::Other, |(_, c)| c)
}

fn uses_individual_channels(req: &EvolutionRequest) -> bool {
    req.noise
        .iter()
        .any(|t| matches!(t.kind, NoiseKind::IndividualDecay | NoiseKind::IndividualDephasing | NoiseKind::Sink) && t.rate > 0.0)
}

impl SweepRequest {
    /// Request for one ensemble size.
    pub fn instantiate(&self, n: usize) -> Result<EvolutionRequest> {
        let model: ModelSpec = self.template.model.with_ensemble_size(n)?;
        let reduction = match self.reduction {
            Some(r) => r,
            None if model.is_permutation_symmetric() && !uses_individual_channels(&self.template) => {
                Reduction::CollectiveSpin
            }
            None => Reduction::FullTensor,
        };
        let cap = match reduction {
            Reduction::FullTensor => FULL_TENSOR_N_CAP,
            Reduction::CollectiveSpin => COLLECTIVE_N_CAP,
        };
        if n == 0 || n > cap {
            return Err(Error::InvalidArgument(format!(
                "N = {n} is outside 1..={cap} for the {reduction:?} reduction"
            )));
        }
        let mut req = self.template.clone();
        req.basis = model.canonical_basis(reduction);
        req.model = model;
        if req.model.is_driven() {
            req.method = Method::AdaptiveRk;
        }
        req.observables = vec![self.observable().to_owned()];
        Ok(req)
    }

    pub fn observable(&self) -> &str {
        self.observable.as_deref().unwrap_or(self.metric.default_observable())
    }

    fn distinct_n(&self) -> Vec<usize> {
        let mut ns = self.n_values.clone();
        ns.sort_unstable();
        ns.dedup();
        ns
    }
}

/// Extracts `metric` from a one-observable trajectory.
pub fn extract_metric(metric: Metric, tr: &Trajectory) -> Result<f64> {
    let values: Vec<f64> = tr.records.iter().map(|r| r[0]).collect();
    let times = &tr.times;
    match metric {
        Metric::ChargingHalfTime | Metric::TransferHalfTime => half_time(times, &values),
        Metric::InitialDecayRate => initial_decay_rate(times, &values),
        Metric::OscillationFrequency => dominant_angular_frequency(times, &values),
        Metric::ShortTimeTransfer => Ok(*values.last().expect("non-empty grid")),
    }
}

/// First time the record reaches half its maximum, interpolated linearly.
pub fn half_time(times: &[f64], values: &[f64]) -> Result<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > values[0]) {
        return Err(Error::Metric("record never rises above its initial value".into()));
    }
    let half = 0.5 * max;
    let k = values
        .iter()
        .position(|&v| v >= half)
        .expect("the maximum itself reaches half of it");
    if k == 0 {
        return Ok(times[0]);
    }
    let (v0, v1) = (values[k - 1], values[k]);
    Ok(times[k - 1] + (half - v0) / (v1 - v0) * (times[k] - times[k - 1]))
}

/// Negative slope of `ln P` over the samples with `P ≥ P(0)/e`.
pub fn initial_decay_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    let p0 = values[0];
    if !(p0 > 0.0) {
        return Err(Error::Metric("initial population is not positive".into()));
    }
    let floor = p0 / std::f64::consts::E;
    let k = values.iter().take_while(|&&v| v >= floor).count();
    if k < 3 {
        return Err(Error::Metric(format!(
            "only {k} samples inside the first e-fold; reduce dt_output"
        )));
    }
    if k == values.len() {
        return Err(Error::Metric("population did not fall by a factor e within t_max".into()));
    }
    let x = &times[..k];
    let y: Vec<f64> = values[..k].iter().map(|v| v.ln()).collect();
    let m = k as f64;
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    Ok(-sxy / sxx)
}

/// Runs every `N` (in parallel), extracts the metric and fits the power law.
pub fn run_sweep(req: &SweepRequest) -> Result<ScalingFit> {
    let ns = req.distinct_n();
    if ns.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "n_values needs at least 3 distinct entries, got {}",
            ns.len()
        )));
    }
    // Reject malformed templates once rather than once per N.
    for &n in &ns {
        req.instantiate(n)?;
    }
    let results: Vec<(usize, Result<f64>)> = ns
        .par_iter()
        .map(|&n| {
            let value = req
                .instantiate(n)
                .and_then(|r| evolve(&r))
                .and_then(|tr| extract_metric(req.metric, &tr));
            (n, value)
        })
        .collect();
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for (n, r) in results {
        match r {
            Ok(v) => samples.push((n, v)),
            Err(e) => failures.push((n, e.to_string())),
        }
    }
    if !failures.is_empty() {
        return Err(Error::SweepFailed { failures });
    }
    fit_power_law(&samples)
}

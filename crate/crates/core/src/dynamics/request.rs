use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::statespace::{BasisSpec, DensityMatrix, InitialState, QuantumState, Reduction};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Eigendecomposition,
    Krylov,
    AdaptiveRk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// `√rate σ−^j` on every site.
    IndividualDecay,
    /// `√rate J−` per ensemble.
    CollectiveDecay,
    /// `√(rate/2) σz^j` on every site, so coherences decay at `rate`.
    IndividualDephasing,
    /// `√rate σ+^{target} σ−^{ensemble,site}`: irreversible transfer into a sink.
    Sink,
}

/// One dissipation channel.
///
/// `ensemble` restricts the channel to one ensemble; by default decay and
/// dephasing act on every ensemble that is not a sink target. For `sink`,
/// `ensemble`/`site` name the drained site (default: last site of the first
/// ensemble) and `target` the sink ensemble (default `sink`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseTerm {
    pub kind: NoiseKind,
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

impl NoiseTerm {
    pub fn new(kind: NoiseKind, rate: f64) -> Self {
        Self {
            kind,
            rate,
            ensemble: None,
            site: None,
            target: None,
        }
    }

    pub fn on(mut self, ensemble: &str) -> Self {
        self.ensemble = Some(ensemble.to_owned());
        self
    }

    pub fn sink(rate: f64, ensemble: &str, site: usize, target: &str) -> Self {
        Self {
            kind: NoiseKind::Sink,
            rate,
            ensemble: Some(ensemble.to_owned()),
            site: Some(site),
            target: Some(target.to_owned()),
        }
    }
}

/// Numerical policy knobs. Defaults are the documented project policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Allowed local error per unit time for the adaptive Runge–Kutta integrator.
    pub rk_tolerance: f64,
    /// Maximum Krylov subspace dimension.
    pub krylov_dim: usize,
    /// Allowed error per unit time for Krylov steps.
    pub krylov_tolerance: f64,
    /// Fixed RK4 step for Lindblad propagation; derived from `open_tolerance` when absent.
    pub open_step: Option<f64>,
    /// Target global error used to derive the Lindblad step.
    pub open_tolerance: f64,
    /// Largest basis dimension accepted for density-operator propagation.
    pub density_dim_cap: usize,
    /// Abort threshold for population in truncation-leaking Fock states.
    pub leak_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rk_tolerance: 1e-10,
            krylov_dim: 30,
            krylov_tolerance: 1e-12,
            open_step: None,
            open_tolerance: 1e-9,
            density_dim_cap: 512,
            leak_threshold: 1e-6,
        }
    }
}

/// Everything needed for one evolution run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionRequest {
    pub model: ModelSpec,
    /// An empty spec (only a `reduction`) selects the model's canonical basis.
    #[serde(default)]
    pub basis: BasisSpec,
    pub initial_state: InitialState,
    pub t_max: f64,
    pub dt_output: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub noise: Vec<NoiseTerm>,
    pub observables: Vec<String>,
    #[serde(default)]
    pub options: SolverOptions,
}

impl EvolutionRequest {
    /// Request on the model's canonical basis, closed dynamics, default options.
    pub fn new(model: ModelSpec, reduction: Reduction, initial_state: InitialState, t_max: f64, dt_output: f64) -> Self {
        let basis = model.canonical_basis(reduction);
        Self {
            model,
            basis,
            initial_state,
            t_max,
            dt_output,
            method: Method::default(),
            noise: Vec::new(),
            observables: Vec::new(),
            options: SolverOptions::default(),
        }
    }

    pub fn observe(mut self, labels: &[&str]) -> Self {
        self.observables.extend(labels.iter().map(|s| s.to_string()));
        self
    }

    pub fn method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn noise(mut self, term: NoiseTerm) -> Self {
        self.noise.push(term);
        self
    }

    /// The basis the request runs on.
    pub fn resolved_basis(&self) -> BasisSpec {
        if self.basis.is_empty() {
            self.model.canonical_basis(self.basis.reduction)
        } else {
            self.basis.clone()
        }
    }

    pub(crate) fn output_times(&self) -> Result<Vec<f64>> {
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidArgument(format!("t_max must be positive, got {}", self.t_max)));
        }
        if !(self.dt_output > 0.0) || self.dt_output > self.t_max {
            return Err(Error::InvalidArgument(format!(
                "dt_output must lie in (0, t_max], got {}",
                self.dt_output
            )));
        }
        let n = (self.t_max / self.dt_output + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| k as f64 * self.dt_output).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FinalState {
    Pure(QuantumState),
    Mixed(DensityMatrix),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunMetadata {
    pub method: String,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest population seen in Fock states the truncation cuts off.
    pub max_truncation_leak: f64,
    /// Largest |‖ψ‖² − 1| (closed) or |Tr ρ − 1| (open) over the records.
    pub max_norm_drift: f64,
    /// Largest |⟨H⟩(t) − ⟨H⟩(0)| for static Hamiltonians.
    pub max_energy_drift: Option<f64>,
    /// Smallest eigenvalue of ρ over the sampled records (open runs).
    pub min_eigenvalue: Option<f64>,
    /// Fixed internal step (open runs).
    pub internal_step: Option<f64>,
}

/// Observable records from one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `records[i][k]` is observable `labels[k]` at `times[i]`.
    pub records: Vec<Vec<f64>>,
    pub final_state: FinalState,
    pub metadata: RunMetadata,
}

impl Trajectory {
    pub fn series(&self, label: &str) -> Option<Vec<f64>> {
        let k = self.labels.iter().position(|l| l == label)?;
        Some(self.records.iter().map(|r| r[k]).collect())
    }

    /// `(label, value)` pairs at one output time.
    pub fn record(&self, i: usize) -> Vec<(&str, f64)> {
        self.labels.iter().map(String::as_str).zip(self.records[i].iter().copied()).collect()
    }
}

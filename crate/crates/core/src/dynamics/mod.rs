//! Closed and open time evolution with observable recording.
//!
//! Closed runs propagate a pure state by exact diagonalization, Lanczos
//! Krylov steps, or an adaptive Dormand–Prince 5(4) integrator (the only
//! choice for driven models). Open runs propagate a density operator under a
//! Lindblad generator with fixed-step RK4.

mod closed;
mod leak;
mod lindblad;
mod observables;
mod request;
mod spectral;
mod transport;

use std::sync::Arc;

pub use closed::evolve_closed;
pub use leak::leaky_states;
pub use lindblad::{collapse_operators, evolve_open};
pub use observables::{measure, measure_label, resolve_observable};
pub use request::{
    EvolutionRequest, FinalState, Method, NoiseKind, NoiseTerm, RunMetadata, SolverOptions, Trajectory,
};
pub use spectral::dominant_angular_frequency;
pub use transport::transfer_efficiency;

use crate::error::{Error, Result};
use crate::models::{build_hamiltonian, BuiltModel};
use crate::statespace::{Basis, OperatorMatrix, QuantumState};

/// Runs `evolve_closed` without noise entries and `evolve_open` otherwise.
pub fn evolve(req: &EvolutionRequest) -> Result<Trajectory> {
    if req.noise.is_empty() {
        evolve_closed(req)
    } else {
        evolve_open(req)
    }
}

/// Resolves everything a run needs (basis, Hamiltonian, initial state,
/// observables, collapse operators) without propagating.
pub fn check_request(req: &EvolutionRequest) -> Result<()> {
    let p = Prepared::new(req)?;
    if req.noise.is_empty() {
        if p.model.is_driven() && req.method != Method::AdaptiveRk {
            return Err(Error::InvalidArgument("driven models require method `adaptive_rk`".into()));
        }
    } else {
        collapse_operators(&req.noise, &p.basis)?;
        if p.basis.dim() > req.options.density_dim_cap {
            return Err(Error::DimensionCap {
                dim: p.basis.dim(),
                cap: req.options.density_dim_cap,
            });
        }
    }
    Ok(())
}

/// Request state resolved against a concrete basis.
pub(crate) struct Prepared {
    pub basis: Arc<Basis>,
    pub model: BuiltModel,
    pub initial: QuantumState,
    pub times: Vec<f64>,
    pub observables: Vec<OperatorMatrix>,
}

impl Prepared {
    pub fn new(req: &EvolutionRequest) -> Result<Self> {
        let times = req.output_times()?;
        let basis = Arc::new(Basis::new(req.resolved_basis())?);
        let model = build_hamiltonian(&req.model, &basis)?;
        let initial = QuantumState::from_initial(&basis, &req.initial_state)?;
        let observables = req
            .observables
            .iter()
            .map(|label| {
                let op = resolve_observable(label, &req.model, &model)?;
                if !op.is_hermitian() {
                    return Err(Error::NonHermitian(label.clone()));
                }
                Ok(op)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            basis,
            model,
            initial,
            times,
            observables,
        })
    }
}

//! Benchmark workloads shared by the criterion targets.

use dickelab_core::dynamics::{EvolutionRequest, Method, NoiseKind, NoiseTerm};
use dickelab_core::models::ModelSpec;
use dickelab_core::statespace::{InitialState, Reduction};

/// Tavis–Cummings vacuum-Rabi run on the full tensor space.
pub fn tavis_cummings(n_tls: usize, method: Method) -> EvolutionRequest {
    let model = ModelSpec::TavisCummings {
        n_tls,
        omega0: 0.5,
        omega: 1.0,
        g: 0.1,
        fock_cutoff: 1,
    };
    EvolutionRequest::new(model, Reduction::FullTensor, InitialState::OnePhoton, 20.0, 1.0)
        .observe(&["photon_number", "excitation"])
        .method(method)
}

/// Collective decay of one shared excitation under the Lindblad integrator.
pub fn collective_decay(n_tls: usize) -> EvolutionRequest {
    let mut req = tavis_cummings(n_tls, Method::Eigendecomposition).noise(NoiseTerm::new(NoiseKind::CollectiveDecay, 0.1));
    req.initial_state = InitialState::SymmetricOneExcitation;
    req.t_max = 4.0;
    req.dt_output = 0.5;
    req.options.open_step = Some(0.05);
    req
}

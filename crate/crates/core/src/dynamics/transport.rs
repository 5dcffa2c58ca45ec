use super::lindblad::evolve_open;
use super::request::{EvolutionRequest, NoiseKind, Trajectory};
use crate::error::{Error, Result};
use crate::models::SINK;

/// Sink population at `t_max`, together with the run that produced it.
///
/// The request must carry a `sink` noise entry; the trajectory gains an
/// `excitation:<target>` record if the caller did not ask for one.
pub fn transfer_efficiency(req: &EvolutionRequest) -> Result<(f64, Trajectory)> {
    let sink = req
        .noise
        .iter()
        .find(|t| t.kind == NoiseKind::Sink)
        .ok_or(Error::MissingSink)?;
    let label = format!("excitation:{}", sink.target.as_deref().unwrap_or(SINK));
    let mut req = req.clone();
    if !req.observables.contains(&label) {
        req.observables.push(label.clone());
    }
    let tr = evolve_open(&req)?;
    let series = tr.series(&label).expect("sink record requested");
    Ok((*series.last().expect("non-empty grid"), tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{NoiseTerm, SolverOptions};
    use crate::models::{ModelSpec, CHAIN};
    use crate::statespace::{InitialState, Reduction};

    fn chain(energies: Vec<f64>, hopping: f64, dephasing: f64, sink_rate: f64, t_max: f64) -> EvolutionRequest {
        let n = energies.len();
        let mut r = EvolutionRequest::new(
            ModelSpec::TransportChain {
                site_energies: energies,
                hopping,
            },
            Reduction::FullTensor,
            InitialState::Product(format!("1{}", "0".repeat(n))),
            t_max,
            t_max / 20.0,
        )
        .noise(NoiseTerm::sink(sink_rate, CHAIN, n - 1, SINK))
        .noise(NoiseTerm::new(NoiseKind::IndividualDephasing, dephasing));
        r.options = SolverOptions {
            open_step: Some(0.02),
            ..SolverOptions::default()
        };
        r
    }

    #[test]
    fn lone_site_drains_completely() {
        let (eff, tr) = transfer_efficiency(&chain(vec![0.0], 0.0, 0.0, 1.0, 40.0)).unwrap();
        assert!((eff - 1.0).abs() < 1e-9, "{eff}");
        let s = tr.series("excitation:sink").unwrap();
        assert!(s.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn decoupled_sink_collects_nothing() {
        let (eff, _) = transfer_efficiency(&chain(vec![0.0, 0.0, 0.0], 1.0, 0.0, 0.0, 20.0)).unwrap();
        assert_eq!(eff, 0.0);
    }

    #[test]
    fn missing_sink_is_an_error() {
        let mut r = chain(vec![0.0, 0.0], 1.0, 0.0, 1.0, 1.0);
        r.noise.retain(|t| t.kind != NoiseKind::Sink);
        assert_eq!(transfer_efficiency(&r).unwrap_err(), Error::MissingSink);
    }
}

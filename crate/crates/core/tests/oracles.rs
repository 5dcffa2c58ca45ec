//! Cross-checks between independent routes to the same physics.

use dickelab_core::dynamics::{evolve, transfer_efficiency, EvolutionRequest, Method, NoiseKind, NoiseTerm};
use dickelab_core::models::{ModelSpec, CHAIN, DONORS, SINK};
use dickelab_core::statespace::{InitialState, Reduction};

fn assert_same_records(a: &EvolutionRequest) {
    let mut full = a.clone();
    full.basis = a.model.canonical_basis(Reduction::FullTensor);
    let mut coll = a.clone();
    coll.basis = a.model.canonical_basis(Reduction::CollectiveSpin);
    let x = evolve(&full).unwrap();
    let y = evolve(&coll).unwrap();
    assert_eq!(x.times, y.times);
    for (i, (r, s)) in x.records.iter().zip(&y.records).enumerate() {
        for (k, (u, v)) in r.iter().zip(s).enumerate() {
            assert!(
                (u - v).abs() < 1e-8,
                "{} N-sweep: {} at t={} differs: {u} vs {v}",
                a.model.family(),
                x.labels[k],
                x.times[i]
            );
        }
    }
}

fn tc(n: usize, g: f64, cutoff: usize) -> ModelSpec {
    ModelSpec::TavisCummings {
        n_tls: n,
        omega0: 0.5,
        omega: 1.0,
        g,
        fock_cutoff: cutoff,
    }
}

#[test]
fn collective_basis_reproduces_full_tensor_closed() {
    for n in 1..=8 {
        for init in [InitialState::OnePhoton, InitialState::SymmetricOneExcitation] {
            let req = EvolutionRequest::new(tc(n, 0.1, 1), Reduction::FullTensor, init, 20.0, 1.0)
                .observe(&["P_excited", "photon_number", "Jz", "n_exc", "energy"]);
            assert_same_records(&req);
        }
    }
    for n in 1..=5 {
        let dicke = ModelSpec::Dicke {
            n_tls: n,
            omega0: 0.5,
            omega: 1.0,
            g: 0.05,
            fock_cutoff: 6,
        };
        let mut req = EvolutionRequest::new(dicke, Reduction::FullTensor, InitialState::AllGround, 10.0, 1.0)
            .observe(&["P_excited", "photon_number", "n_exc"]);
        req.options.leak_threshold = 1.0;
        assert_same_records(&req);
    }
    for n in 1..=4 {
        let st = ModelSpec::Supertransfer {
            n_donors: n,
            m_acceptors: n,
            omega_a: 1.0,
            omega_b: 1.0,
            gamma: 0.05,
        };
        let req = EvolutionRequest::new(st, Reduction::FullTensor, InitialState::SymmetricExcitationIn(DONORS.into()), 20.0, 1.0)
            .observe(&["acceptor_population", "Jz:donors"]);
        assert_same_records(&req);
    }
}

#[test]
fn collective_basis_reproduces_full_tensor_driven_and_open() {
    for n in [1, 2, 4, 8] {
        let battery = ModelSpec::DrivenBattery {
            n_tls: n,
            omega0: 1.0,
            omega: 1.0,
            omega_l: 1.0,
            g: 0.1,
            eta0: 0.2,
            sigma_pulse: 0.01,
            t0: 0.05,
            fock_cutoff: 4,
        };
        let req = EvolutionRequest::new(battery, Reduction::FullTensor, InitialState::AllGround, 5.0, 0.5)
            .observe(&["stored_energy", "photon_number"])
            .method(Method::AdaptiveRk);
        assert_same_records(&req);
    }
    for n in 1..=6 {
        let mut req = EvolutionRequest::new(tc(n, 0.1, 1), Reduction::FullTensor, InitialState::SymmetricOneExcitation, 4.0, 0.5)
            .observe(&["excitation", "photon_number"])
            .noise(NoiseTerm::new(NoiseKind::CollectiveDecay, 0.1));
        req.options.open_step = Some(0.05);
        assert_same_records(&req);
    }
}

fn transfer_probability(n: usize, t: f64) -> f64 {
    let st = ModelSpec::Supertransfer {
        n_donors: n,
        m_acceptors: n,
        omega_a: 1.0,
        omega_b: 1.0,
        gamma: 0.05,
    };
    let req = EvolutionRequest::new(st, Reduction::CollectiveSpin, InitialState::SymmetricExcitationIn(DONORS.into()), t, t)
        .observe(&["acceptor_population"]);
    *evolve(&req).unwrap().series("acceptor_population").unwrap().last().unwrap()
}

#[test]
fn short_time_supertransfer_grows_as_n_squared() {
    let t = 0.5;
    let (p1, p2) = (transfer_probability(1, t), transfer_probability(2, t));
    assert!(p1 <= 1e-3);
    // perturbative (γ√(NM) t)²
    for (n, p) in [(1.0, p1), (2.0, p2)] {
        let pert = (0.05 * n * t).powi(2);
        assert!((p - pert).abs() / pert < 1e-2, "N={n}: {p} vs {pert}");
    }
    let ratio = p2 / p1;
    assert!((3.8..=4.2).contains(&ratio), "{ratio}");
}

fn chain_efficiency(dephasing: f64) -> f64 {
    let mut req = EvolutionRequest::new(
        ModelSpec::TransportChain {
            site_energies: vec![0.0, 1.0, 2.0, 3.0, 4.0],
            hopping: 1.0,
        },
        Reduction::FullTensor,
        InitialState::Product("100000".into()),
        20.0,
        1.0,
    )
    .noise(NoiseTerm::sink(1.0, CHAIN, 4, SINK))
    .noise(NoiseTerm::new(NoiseKind::IndividualDephasing, dephasing));
    req.options.open_step = Some(0.02);
    transfer_efficiency(&req).unwrap().0
}

#[test]
fn dephasing_assists_transport_on_a_graded_chain() {
    let (none, mid, large) = (chain_efficiency(0.0), chain_efficiency(0.3), chain_efficiency(30.0));
    assert!(mid > none && mid > large, "{none} {mid} {large}");
}

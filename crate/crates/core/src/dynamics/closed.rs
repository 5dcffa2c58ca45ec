use nalgebra::{DMatrix, DVector};

use super::leak::LeakMonitor;
use super::request::{EvolutionRequest, FinalState, Method, RunMetadata, Trajectory};
use super::Prepared;
use crate::error::{Error, Result};
use crate::models::BuiltModel;
use crate::statespace::{OperatorMatrix, QuantumState};
use crate::C64;

/// Largest dimension accepted by the dense eigendecomposition route.
const EIGEN_DIM_CAP: usize = 4096;

const I: C64 = C64::new(0.0, 1.0);

struct Recorder {
    observables: Vec<OperatorMatrix>,
    energy: Option<OperatorMatrix>,
    energy0: f64,
    leak: LeakMonitor,
    records: Vec<Vec<f64>>,
    meta: RunMetadata,
}

fn expect(op: &OperatorMatrix, psi: &DVector<C64>) -> f64 {
    psi.dotc(&op.apply(psi)).re
}

impl Recorder {
    fn record(&mut self, t: f64, psi: &DVector<C64>) -> Result<()> {
        self.leak.check_pure(t, psi)?;
        self.meta.max_norm_drift = self.meta.max_norm_drift.max((psi.norm_squared() - 1.0).abs());
        if let Some(h) = &self.energy {
            let e = expect(h, psi);
            if self.records.is_empty() {
                self.energy0 = e;
            }
            let d = self.meta.max_energy_drift.unwrap_or(0.0).max((e - self.energy0).abs());
            self.meta.max_energy_drift = Some(d);
        }
        self.records.push(self.observables.iter().map(|op| expect(op, psi)).collect());
        Ok(())
    }
}

/// Propagates a pure state under a closed (possibly driven) Hamiltonian.
pub fn evolve_closed(req: &EvolutionRequest) -> Result<Trajectory> {
    if !req.noise.is_empty() {
        return Err(Error::InvalidArgument(
            "evolve_closed takes no noise entries; use evolve_open".into(),
        ));
    }
    let p = Prepared::new(req)?;
    if p.model.is_driven() && req.method != Method::AdaptiveRk {
        return Err(Error::InvalidArgument(
            "driven models require method `adaptive_rk`".into(),
        ));
    }
    let mut rec = Recorder {
        observables: p.observables.clone(),
        energy: (!p.model.is_driven()).then(|| p.model.static_part.clone()),
        energy0: 0.0,
        leak: LeakMonitor::new(&req.model, &p.basis, req.options.leak_threshold)?,
        records: Vec::with_capacity(p.times.len()),
        meta: RunMetadata {
            method: method_name(req.method).into(),
            ..RunMetadata::default()
        },
    };
    let psi0 = p.initial.amplitudes().clone();
    let psi = match req.method {
        Method::Eigendecomposition => eigen_route(&p.model.static_part, &psi0, &p.times, &mut rec)?,
        Method::Krylov => krylov_route(&p.model.static_part, &psi0, &p.times, req, &mut rec)?,
        Method::AdaptiveRk => rk_route(&p.model, &psi0, &p.times, req.options.rk_tolerance, &mut rec)?,
    };
    rec.meta.max_truncation_leak = rec.leak.max_leak;
    Ok(Trajectory {
        times: p.times,
        labels: req.observables.clone(),
        records: rec.records,
        final_state: FinalState::Pure(QuantumState::from_raw(&p.basis, psi)),
        metadata: rec.meta,
    })
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Eigendecomposition => "eigendecomposition",
        Method::Krylov => "krylov",
        Method::AdaptiveRk => "adaptive_rk",
    }
}

fn eigen_route(h: &OperatorMatrix, psi0: &DVector<C64>, times: &[f64], rec: &mut Recorder) -> Result<DVector<C64>> {
    if h.dim() > EIGEN_DIM_CAP {
        return Err(Error::UnsupportedRepresentation(format!(
            "eigendecomposition is limited to dimension {EIGEN_DIM_CAP} (got {}); use `krylov`",
            h.dim()
        )));
    }
    let eig = h.to_dense().symmetric_eigen();
    let v = eig.eigenvectors;
    let c0 = v.adjoint() * psi0;
    let mut psi = psi0.clone();
    for &t in times {
        let ct = DVector::from_iterator(
            c0.len(),
            c0.iter().zip(eig.eigenvalues.iter()).map(|(c, &l)| c * (-I * l * t).exp()),
        );
        psi = &v * ct;
        rec.record(t, &psi)?;
    }
    Ok(psi)
}

/// Lanczos basis of `span{v, Hv, …}` with full reorthogonalization.
struct Lanczos {
    vectors: Vec<DVector<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Norm of the residual after the last vector; zero on breakdown.
    beta_next: f64,
}

fn lanczos(h: &OperatorMatrix, v0: &DVector<C64>, m_max: usize) -> Lanczos {
    let scale = h.norm_inf().max(1e-300);
    let mut vectors = vec![v0 / C64::from(v0.norm())];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut beta_next = 0.0;
    for j in 0..m_max {
        let mut w = h.apply(&vectors[j]);
        alpha.push(vectors[j].dotc(&w).re);
        for _ in 0..2 {
            for q in &vectors {
                let c = q.dotc(&w);
                w.axpy(-c, q, C64::from(1.0));
            }
        }
        let b = w.norm();
        if b <= 1e-13 * scale {
            beta_next = 0.0;
            break;
        }
        if j + 1 == m_max {
            beta_next = b;
            break;
        }
        beta.push(b);
        vectors.push(w / C64::from(b));
    }
    Lanczos {
        vectors,
        alpha,
        beta,
        beta_next,
    }
}

struct TridiagExp {
    q: DMatrix<f64>,
    theta: DVector<f64>,
}

impl TridiagExp {
    fn new(l: &Lanczos) -> Self {
        let m = l.alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = l.alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = l.beta[i];
                t[(i + 1, i)] = l.beta[i];
            }
        }
        let e = t.symmetric_eigen();
        Self {
            q: e.eigenvectors,
            theta: e.eigenvalues,
        }
    }

    /// `exp(−iTτ) e₁`.
    fn apply(&self, tau: f64) -> DVector<C64> {
        let m = self.theta.len();
        DVector::from_fn(m, |i, _| {
            (0..m)
                .map(|k| C64::from(self.q[(i, k)] * self.q[(0, k)]) * (-I * self.theta[k] * tau).exp())
                .sum()
        })
    }
}

fn krylov_route(
    h: &OperatorMatrix,
    psi0: &DVector<C64>,
    times: &[f64],
    req: &EvolutionRequest,
    rec: &mut Recorder,
) -> Result<DVector<C64>> {
    let m_max = req.options.krylov_dim.clamp(2, h.dim().max(2));
    let tol = req.options.krylov_tolerance;
    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut tau = times.get(1).copied().unwrap_or(1.0);
    rec.record(times[0], &psi)?;
    for &target in &times[1..] {
        while target - t > 1e-12 * target.max(1.0) {
            let lz = lanczos(h, &psi, m_max);
            let te = TridiagExp::new(&lz);
            let mut step = tau.min(target - t);
            let mut rejected = false;
            let y = loop {
                let y = te.apply(step);
                let err = lz.beta_next * y[y.len() - 1].norm();
                if err <= tol * step {
                    break y;
                }
                rec.meta.rejected_steps += 1;
                rejected = true;
                step *= 0.5;
                if step < 1e-14 * t.max(1.0) {
                    return Err(Error::StepUnderflow { time: t, step });
                }
            };
            let nrm = psi.norm();
            psi = lz
                .vectors
                .iter()
                .zip(y.iter())
                .fold(DVector::zeros(psi.len()), |acc, (v, &c)| acc + v * (c * nrm));
            rec.meta.accepted_steps += 1;
            t += step;
            if rejected {
                tau = step;
            } else if step >= tau {
                tau *= 1.5;
            }
        }
        t = target;
        rec.record(t, &psi)?;
    }
    Ok(psi)
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

fn rhs(model: &BuiltModel, t: f64, psi: &DVector<C64>) -> DVector<C64> {
    let mut hpsi = model.static_part.apply(psi);
    if let Some(d) = &model.drive {
        let eta = d.envelope.eval(t);
        if eta != 0.0 {
            hpsi.axpy(C64::from(eta), &d.operator.apply(psi), C64::from(1.0));
        }
    }
    hpsi * -I
}

fn rk_route(
    model: &BuiltModel,
    psi0: &DVector<C64>,
    times: &[f64],
    tol: f64,
    rec: &mut Recorder,
) -> Result<DVector<C64>> {
    let mut bound = model.static_part.norm_inf();
    if let Some(d) = &model.drive {
        bound += d.envelope.eta0.abs() * d.operator.norm_inf();
    }
    let mut h = (0.1 / bound.max(1e-12)).min(times.get(1).copied().unwrap_or(1.0));
    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut k1 = rhs(model, t, &psi);
    rec.record(times[0], &psi)?;
    for &target in &times[1..] {
        while target - t > 1e-12 * target.max(1.0) {
            let remaining = target - t;
            let clipped = h >= remaining;
            let step = h.min(remaining);
            let mut k: Vec<DVector<C64>> = Vec::with_capacity(7);
            k.push(k1.clone());
            for s in 1..7 {
                let mut y = psi.clone();
                for (j, kj) in k.iter().enumerate() {
                    if A[s][j] != 0.0 {
                        y.axpy(C64::from(step * A[s][j]), kj, C64::from(1.0));
                    }
                }
                k.push(rhs(model, t + C[s] * step, &y));
            }
            // stage 7 is evaluated at the fifth-order solution
            let mut y5 = psi.clone();
            for (j, kj) in k.iter().take(6).enumerate() {
                if A[6][j] != 0.0 {
                    y5.axpy(C64::from(step * A[6][j]), kj, C64::from(1.0));
                }
            }
            let mut err_vec = DVector::<C64>::zeros(psi.len());
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    err_vec.axpy(C64::from(step * E[j]), kj, C64::from(1.0));
                }
            }
            let err_rate = err_vec.norm() / step;
            let factor = if err_rate == 0.0 {
                5.0
            } else {
                (0.9 * (tol / err_rate).powf(0.2)).clamp(0.2, 5.0)
            };
            if err_rate <= tol {
                psi = y5;
                k1 = k.pop().expect("seven stages");
                t += step;
                rec.meta.accepted_steps += 1;
                if !clipped {
                    h = step * factor;
                } else {
                    h = h.max(step * factor.min(1.0));
                }
            } else {
                rec.meta.rejected_steps += 1;
                h = step * factor;
                if h < 16.0 * f64::EPSILON * t.max(1.0) {
                    return Err(Error::StepUnderflow { time: t, step: h });
                }
            }
        }
        t = target;
        rec.record(t, &psi)?;
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::dynamics::NoiseTerm;
    use crate::dynamics::NoiseKind;
    use crate::models::ModelSpec;
    use crate::statespace::{InitialState, Reduction};

    fn jc(g: f64, cutoff: usize) -> ModelSpec {
        ModelSpec::JaynesCummings {
            omega0: 0.5,
            omega: 1.0,
            g,
            fock_cutoff: cutoff,
        }
    }

    fn tc(n: usize, g: f64) -> ModelSpec {
        ModelSpec::TavisCummings {
            n_tls: n,
            omega0: 0.5,
            omega: 1.0,
            g,
            fock_cutoff: 1,
        }
    }

    const ALL: [Method; 3] = [Method::Eigendecomposition, Method::Krylov, Method::AdaptiveRk];

    #[test]
    fn jc_population_follows_cos_squared() {
        for m in ALL {
            let req = EvolutionRequest::new(jc(0.1, 1), Reduction::FullTensor, InitialState::FullyExcited, 40.0, 0.1)
                .observe(&["P_excited"])
                .method(m);
            let tr = evolve_closed(&req).unwrap();
            for (t, p) in tr.times.iter().zip(tr.series("P_excited").unwrap()) {
                assert!((p - (0.1 * t).cos().powi(2)).abs() < 1e-7, "{m:?} t={t}");
            }
            assert!(tr.metadata.max_norm_drift < 1e-9, "{m:?} {}", tr.metadata.max_norm_drift);
            assert!(tr.metadata.max_energy_drift.unwrap() < 1e-9);
        }
    }

    #[test]
    fn jc_excited_population_vanishes_at_quarter_period() {
        let t = PI / 0.2;
        let req = EvolutionRequest::new(jc(0.1, 1), Reduction::FullTensor, InitialState::FullyExcited, t, t)
            .observe(&["P_excited"]);
        let p = evolve_closed(&req).unwrap().series("P_excited").unwrap()[1];
        assert!(p.abs() < 1e-12);
        assert!((t - 15.70796).abs() < 1e-5);
    }

    #[test]
    fn two_qubit_swap_is_sin_squared() {
        let spec = ModelSpec::TwoQubitTransfer { gamma: 0.05 };
        let req = EvolutionRequest::new(
            spec,
            Reduction::FullTensor,
            InitialState::Product("10".into()),
            10.0 * PI,
            PI / 4.0,
        )
        .observe(&["excitation:q2"]);
        let tr = evolve_closed(&req).unwrap();
        for (t, p) in tr.times.iter().zip(tr.series("excitation:q2").unwrap()) {
            assert!((p - (0.05 * t).sin().powi(2)).abs() < 1e-10);
        }
        assert!((tr.series("excitation:q2").unwrap().last().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_hamiltonian_leaves_state_constant() {
        let spec = ModelSpec::TwoQubitTransfer { gamma: 0.0 };
        for m in ALL {
            let req = EvolutionRequest::new(
                spec.clone(),
                Reduction::FullTensor,
                InitialState::Amplitudes(vec![[0.5, 0.0], [0.0, 0.5], [-0.5, 0.0], [0.5, 0.0]]),
                5.0,
                1.0,
            )
            .method(m);
            let tr = evolve_closed(&req).unwrap();
            let FinalState::Pure(psi) = tr.final_state else { panic!() };
            let expected = [C64::new(0.5, 0.0), C64::new(0.0, 0.5), C64::new(-0.5, 0.0), C64::new(0.5, 0.0)];
            for (a, e) in psi.amplitudes().iter().zip(expected) {
                assert!((a - e).norm() < 1e-14, "{m:?}");
            }
        }
    }

    #[test]
    fn tavis_cummings_photon_frequency() {
        let req = EvolutionRequest::new(tc(4, 0.05), Reduction::CollectiveSpin, InitialState::OnePhoton, 400.0, 0.25)
            .observe(&["photon_number"]);
        let tr = evolve_closed(&req).unwrap();
        let w = super::super::dominant_angular_frequency(&tr.times, &tr.series("photon_number").unwrap()).unwrap();
        // photon number oscillates as cos²(g√N t): angular frequency 2g√N
        assert!((w - 0.2).abs() / 0.2 < 1e-3, "{w}");
    }

    #[test]
    fn methods_agree() {
        let spec = ModelSpec::Dicke {
            n_tls: 3,
            omega0: 0.6,
            omega: 1.0,
            g: 0.3,
            fock_cutoff: 8,
        };
        let mk = |m| {
            let mut r = EvolutionRequest::new(spec.clone(), Reduction::CollectiveSpin, InitialState::FullyExcited, 10.0, 0.5)
                .observe(&["Jz", "photon_number", "n_exc"])
                .method(m);
            r.options.leak_threshold = 1.0;
            evolve_closed(&r).unwrap()
        };
        let base = mk(Method::Eigendecomposition);
        for m in [Method::Krylov, Method::AdaptiveRk] {
            let other = mk(m);
            for (a, b) in base.records.iter().zip(&other.records) {
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y).abs() < 1e-7, "{m:?}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn excitation_number_conserved_only_with_rotating_wave() {
        let run = |spec: ModelSpec| {
            let req = EvolutionRequest::new(spec, Reduction::CollectiveSpin, InitialState::FullyExcited, 20.0, 0.5)
                .observe(&["n_exc"]);
            let mut req = req;
            req.options.leak_threshold = 1.0;
            let s = evolve_closed(&req).unwrap().series("n_exc").unwrap();
            s.iter().map(|x| (x - s[0]).abs()).fold(0.0, f64::max)
        };
        assert!(run(tc(3, 0.2)) < 1e-9);
        let dicke = ModelSpec::Dicke {
            n_tls: 3,
            omega0: 0.5,
            omega: 1.0,
            g: 0.2,
            fock_cutoff: 6,
        };
        assert!(run(dicke) > 1e-3);
    }

    #[test]
    fn truncation_leak_aborts_and_names_mode() {
        let spec = ModelSpec::Rabi {
            omega0: 0.5,
            omega: 1.0,
            g: 0.5,
            fock_cutoff: 1,
        };
        let req = EvolutionRequest::new(spec, Reduction::FullTensor, InitialState::FullyExcited, 10.0, 0.5);
        match evolve_closed(&req) {
            Err(Error::TruncationLeak { mode, cutoff, .. }) => {
                assert_eq!(mode, "cavity");
                assert_eq!(cutoff, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jc_at_cutoff_one_does_not_trip_the_monitor() {
        let req = EvolutionRequest::new(jc(0.1, 1), Reduction::FullTensor, InitialState::FullyExcited, 50.0, 1.0);
        let tr = evolve_closed(&req).unwrap();
        assert_eq!(tr.metadata.max_truncation_leak, 0.0);
    }

    #[test]
    fn driven_battery_requires_adaptive_rk_and_conserves_norm() {
        let spec = ModelSpec::DrivenBattery {
            n_tls: 2,
            omega0: 1.0,
            omega: 1.0,
            omega_l: 1.0,
            g: 0.1,
            eta0: 0.2,
            sigma_pulse: 0.01,
            t0: 0.05,
            fock_cutoff: 5,
        };
        let req = EvolutionRequest::new(spec, Reduction::CollectiveSpin, InitialState::AllGround, 20.0, 0.5)
            .observe(&["stored_energy"]);
        assert!(evolve_closed(&req).is_err());
        let tr = evolve_closed(&req.clone().method(Method::AdaptiveRk)).unwrap();
        assert!(tr.metadata.max_norm_drift < 1e-9, "{}", tr.metadata.max_norm_drift);
        assert!(tr.metadata.max_energy_drift.is_none());
        assert!(tr.series("stored_energy").unwrap().iter().any(|&e| e > 0.0));
    }

    #[test]
    fn closed_rejects_noise() {
        let req = EvolutionRequest::new(jc(0.1, 1), Reduction::FullTensor, InitialState::FullyExcited, 1.0, 0.5)
            .noise(NoiseTerm::new(NoiseKind::IndividualDecay, 0.0));
        assert!(evolve_closed(&req).is_err());
    }
}

use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::spec::*;
use crate::error::{Error, Result};
use crate::statespace::{
    boson_operator, ensemble_operator, excitation_operator, single_site_operator, Basis, BosonOp, CollectiveOp,
    OperatorMatrix, Reduction, SiteOp,
};

/// Time-dependent part `η(t) · D` of a driven Hamiltonian.
#[derive(Clone, Debug)]
pub struct Drive {
    pub envelope: DriveEnvelope,
    /// Hermitian drive operator `D = i (a† − a)`.
    pub operator: OperatorMatrix,
}

/// A Hamiltonian ready for propagation.
#[derive(Clone, Debug)]
pub struct BuiltModel {
    pub static_part: OperatorMatrix,
    pub drive: Option<Drive>,
}

impl BuiltModel {
    pub fn basis(&self) -> &Arc<Basis> {
        self.static_part.basis()
    }

    pub fn is_driven(&self) -> bool {
        self.drive.is_some()
    }

    /// Full Hamiltonian at time `t`.
    pub fn at(&self, t: f64) -> OperatorMatrix {
        match &self.drive {
            None => self.static_part.clone(),
            Some(d) => self
                .static_part
                .add(&d.operator.scale_real(d.envelope.eval(t)))
                .expect("drive shares the static basis"),
        }
    }
}

/// Builds the Hamiltonian of `spec` on `basis`.
pub fn build_hamiltonian(spec: &ModelSpec, basis: &Arc<Basis>) -> Result<BuiltModel> {
    if let Some(v) = spec.validate().into_iter().next() {
        return Err(Error::InvalidArgument(format!("{}: {}", v.path, v.message)));
    }
    check_compatible(spec, basis, true)?;
    assemble(spec, basis)
}

/// Checks that `basis` carries the ensembles and modes the model acts on.
pub fn check_compatible(spec: &ModelSpec, basis: &Basis, strict_cutoff: bool) -> Result<()> {
    if basis.reduction() == Reduction::CollectiveSpin && !spec.is_permutation_symmetric() {
        return Err(Error::ModelBasisMismatch(format!(
            "family `{}` is not permutation-symmetric; collective_spin is not valid",
            spec.family()
        )));
    }
    let expected = spec.canonical_basis(basis.reduction());
    for e in &expected.ensembles {
        let (_, n) = basis.ensemble_factor(&e.label).map_err(|_| {
            Error::ModelBasisMismatch(format!("basis lacks ensemble `{}` required by `{}`", e.label, spec.family()))
        })?;
        if n != e.n_tls {
            return Err(Error::ModelBasisMismatch(format!(
                "ensemble `{}` has {n} sites, model expects {}",
                e.label, e.n_tls
            )));
        }
    }
    for m in &expected.modes {
        let (_, cutoff) = basis.mode_factor(&m.label).map_err(|_| {
            Error::ModelBasisMismatch(format!("basis lacks mode `{}` required by `{}`", m.label, spec.family()))
        })?;
        if strict_cutoff && cutoff != m.fock_cutoff {
            return Err(Error::ModelBasisMismatch(format!(
                "mode `{}` has cutoff {cutoff}, model expects {}",
                m.label, m.fock_cutoff
            )));
        }
    }
    Ok(())
}

fn sum(terms: &[OperatorMatrix]) -> Result<OperatorMatrix> {
    let (first, rest) = terms.split_first().expect("at least one term");
    rest.iter().try_fold(first.clone(), |acc, t| acc.add(t))
}

fn pair_with_adjoint(op: OperatorMatrix) -> Result<OperatorMatrix> {
    op.add(&op.adjoint())
}

/// Builds without the cutoff equality check; used for the leak monitor which
/// needs the same model on an enlarged basis.
pub(crate) fn assemble(spec: &ModelSpec, b: &Arc<Basis>) -> Result<BuiltModel> {
    let jz = |e: &str| ensemble_operator(b, e, CollectiveOp::Jz);
    let jp = |e: &str| ensemble_operator(b, e, CollectiveOp::JPlus);
    let jx = |e: &str| ensemble_operator(b, e, CollectiveOp::Jx);
    let boson = |m: &str, k| boson_operator(b, m, k);

    let mut drive = None;
    let static_part = match *spec {
        // Σσz = 2 Jz and Σσx = 2 Jx in both reductions.
        ModelSpec::Rabi { omega0, omega, g, .. } | ModelSpec::Dicke { omega0, omega, g, .. } => {
            let x = boson(CAVITY, BosonOp::A)?.add(&boson(CAVITY, BosonOp::ADag)?)?;
            sum(&[
                jz(TLS)?.scale_real(2.0 * omega0),
                boson(CAVITY, BosonOp::N)?.scale_real(omega),
                jx(TLS)?.scale_real(2.0).matmul(&x)?.scale_real(g),
            ])?
        }
        ModelSpec::JaynesCummings { omega0, omega, g, .. } | ModelSpec::TavisCummings { omega0, omega, g, .. } => {
            let coupling = pair_with_adjoint(jp(TLS)?.matmul(&boson(CAVITY, BosonOp::A)?)?)?;
            sum(&[
                jz(TLS)?.scale_real(2.0 * omega0),
                boson(CAVITY, BosonOp::N)?.scale_real(omega),
                coupling.scale_real(g),
            ])?
        }
        ModelSpec::Supertransfer {
            omega_a, omega_b, gamma, ..
        } => {
            let flip = pair_with_adjoint(jp(DONORS)?.matmul(&ensemble_operator(b, ACCEPTORS, CollectiveOp::JMinus)?)?)?;
            sum(&[
                jz(DONORS)?.scale_real(-omega_a),
                jz(ACCEPTORS)?.scale_real(-omega_b),
                flip.scale_real(gamma),
            ])?
        }
        ModelSpec::DrivenBattery {
            omega,
            omega_l,
            g,
            eta0,
            sigma_pulse,
            t0,
            ..
        } => {
            let detuning = omega - omega_l;
            let coupling = pair_with_adjoint(boson(CAVITY, BosonOp::ADag)?.matmul(&ensemble_operator(
                b,
                TLS,
                CollectiveOp::JMinus,
            )?)?)?;
            let a = boson(CAVITY, BosonOp::A)?;
            let operator = boson(CAVITY, BosonOp::ADag)?.sub(&a)?.scale(C64::new(0.0, 1.0));
            drive = Some(Drive {
                envelope: DriveEnvelope::new(eta0, sigma_pulse, t0)?,
                operator,
            });
            // Δ/2 Σσz = Δ Jz
            sum(&[
                jz(TLS)?.scale_real(detuning),
                boson(CAVITY, BosonOp::N)?.scale_real(detuning),
                coupling.scale_real(g),
            ])?
        }
        ModelSpec::TwoEnsembleCavity {
            delta1,
            delta2,
            j,
            delta,
            g1,
            g2,
            n1,
            n2,
            ..
        } => {
            let hop = pair_with_adjoint(boson(CAVITY_1, BosonOp::ADag)?.matmul(&boson(CAVITY_2, BosonOp::A)?)?)?;
            let c1 = pair_with_adjoint(boson(CAVITY_1, BosonOp::A)?.matmul(&jp(NUCLEI_1)?)?)?;
            let c2 = pair_with_adjoint(boson(CAVITY_2, BosonOp::A)?.matmul(&jp(NUCLEI_2)?)?)?;
            sum(&[
                boson(CAVITY_1, BosonOp::N)?.scale_real(delta1),
                boson(CAVITY_2, BosonOp::N)?.scale_real(delta2),
                hop.scale_real(j),
                excitation_operator(b, NUCLEI_1)?.scale_real(-delta),
                excitation_operator(b, NUCLEI_2)?.scale_real(-delta),
                c1.scale_real(g1 * (n1 as f64).sqrt()),
                c2.scale_real(g2 * (n2 as f64).sqrt()),
            ])?
        }
        ModelSpec::TwoQubitTransfer { gamma } => {
            let flip = pair_with_adjoint(jp(QUBIT_1)?.matmul(&ensemble_operator(b, QUBIT_2, CollectiveOp::JMinus)?)?)?;
            flip.scale_real(gamma)
        }
        ModelSpec::TransportChain {
            ref site_energies,
            hopping,
        } => {
            let mut terms = vec![OperatorMatrix::zero(b)];
            for (i, &eps) in site_energies.iter().enumerate() {
                let sp = single_site_operator(b, CHAIN, i, SiteOp::SPlus)?;
                let sm = single_site_operator(b, CHAIN, i, SiteOp::SMinus)?;
                terms.push(sp.matmul(&sm)?.scale_real(eps));
                if i + 1 < site_energies.len() {
                    let next = single_site_operator(b, CHAIN, i + 1, SiteOp::SMinus)?;
                    terms.push(pair_with_adjoint(sp.matmul(&next)?)?.scale_real(hopping));
                }
            }
            sum(&terms)?
        }
    };
    debug_assert!(static_part.is_hermitian());
    Ok(BuiltModel { static_part, drive })
}

/// Total excitation number `Σ σ+σ− + Σ a†a`, conserved by the co-rotating
/// families. `None` for Rabi and Dicke.
pub fn conserved_excitation_operator(spec: &ModelSpec, basis: &Arc<Basis>) -> Result<Option<OperatorMatrix>> {
    if spec.has_counter_rotating_terms() {
        return Ok(None);
    }
    check_compatible(spec, basis, false)?;
    total_excitation_operator(basis).map(Some)
}

/// `Σ σ+σ− + Σ a†a` over every ensemble and mode of the basis.
pub fn total_excitation_operator(basis: &Arc<Basis>) -> Result<OperatorMatrix> {
    let mut terms = vec![OperatorMatrix::zero(basis)];
    for e in &basis.spec().ensembles {
        terms.push(excitation_operator(basis, &e.label)?);
    }
    for m in &basis.spec().modes {
        terms.push(boson_operator(basis, &m.label, BosonOp::N)?);
    }
    sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statespace::{project_to_collective, BasisSpec};
    use nalgebra::DMatrix;

    fn basis_for(spec: &ModelSpec, red: Reduction) -> Arc<Basis> {
        Arc::new(Basis::new(spec.canonical_basis(red)).unwrap())
    }

    fn build(spec: &ModelSpec, red: Reduction) -> BuiltModel {
        build_hamiltonian(spec, &basis_for(spec, red)).unwrap()
    }

    fn jc(omega0: f64, omega: f64, g: f64, cutoff: usize) -> ModelSpec {
        ModelSpec::JaynesCummings {
            omega0,
            omega,
            g,
            fock_cutoff: cutoff,
        }
    }

    /// Eigenvalues of a 2x2 Hermitian block, by the closed-form quadratic.
    fn two_by_two_eigs(a: f64, d: f64, off: f64) -> (f64, f64) {
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d).powi(2) + off * off).sqrt();
        (mean - r, mean + r)
    }

    #[test]
    fn jc_single_excitation_block_splits_by_two_g_at_resonance() {
        // Resonance for the printed ω0 σz form is 2 ω0 = ω.
        let model = build(&jc(0.5, 1.0, 0.1, 1), Reduction::FullTensor);
        let b = model.basis();
        let e0 = b.index_of(&crate::statespace::Configuration(vec![1, 0])).unwrap();
        let g1 = b.index_of(&crate::statespace::Configuration(vec![0, 1])).unwrap();
        let h = &model.static_part;
        let (lo, hi) = two_by_two_eigs(h.get(e0, e0).re, h.get(g1, g1).re, h.get(e0, g1).re);
        assert!((hi - lo - 0.2).abs() < 1e-12);
        // The ω0 = ω = 1 parameter set is detuned by ω0 under the printed convention.
        let detuned = build(&jc(1.0, 1.0, 0.1, 1), Reduction::FullTensor);
        let h = &detuned.static_part;
        let (lo, hi) = two_by_two_eigs(h.get(e0, e0).re, h.get(g1, g1).re, h.get(e0, g1).re);
        assert!((hi - lo - (1.0f64 + 0.04).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rabi_without_coupling_is_diagonal() {
        let spec = ModelSpec::Rabi {
            omega0: 0.7,
            omega: 1.3,
            g: 0.0,
            fock_cutoff: 3,
        };
        let m = build(&spec, Reduction::FullTensor);
        let b = m.basis();
        let mut expected = DMatrix::zeros(b.dim(), b.dim());
        for i in 0..b.dim() {
            let sz = if b.digit(i, 0) == 1 { 1.0 } else { -1.0 };
            expected[(i, i)] = C64::new(0.7 * sz + 1.3 * b.digit(i, 1) as f64, 0.0);
        }
        assert_eq!(m.static_part.to_dense(), expected);
    }

    #[test]
    fn single_tls_dicke_and_tc_match_rabi_and_jc() {
        for red in [Reduction::FullTensor, Reduction::CollectiveSpin] {
            let rabi = build(
                &ModelSpec::Rabi {
                    omega0: 0.4,
                    omega: 1.0,
                    g: 0.2,
                    fock_cutoff: 4,
                },
                red,
            );
            let dicke = build(
                &ModelSpec::Dicke {
                    n_tls: 1,
                    omega0: 0.4,
                    omega: 1.0,
                    g: 0.2,
                    fock_cutoff: 4,
                },
                red,
            );
            assert_eq!(rabi.static_part.to_dense(), dicke.static_part.to_dense());
            let jcm = build(&jc(0.4, 1.0, 0.2, 4), red);
            let tc = build(
                &ModelSpec::TavisCummings {
                    n_tls: 1,
                    omega0: 0.4,
                    omega: 1.0,
                    g: 0.2,
                    fock_cutoff: 4,
                },
                red,
            );
            assert_eq!(jcm.static_part.to_dense(), tc.static_part.to_dense());
        }
    }

    #[test]
    fn tavis_cummings_full_restricted_equals_collective() {
        for n in 1..=6 {
            let spec = ModelSpec::TavisCummings {
                n_tls: n,
                omega0: 0.5,
                omega: 1.1,
                g: 0.07,
                fock_cutoff: 2,
            };
            let full = build(&spec, Reduction::FullTensor);
            let coll_basis = basis_for(&spec, Reduction::CollectiveSpin);
            let coll = build_hamiltonian(&spec, &coll_basis).unwrap();
            let projected = project_to_collective(&full.static_part, &coll_basis).unwrap();
            assert!(projected.max_abs_diff(&coll.static_part).unwrap() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn supertransfer_symmetric_states_couple_with_sqrt_nm() {
        for (n, m) in [(1, 1), (2, 3), (4, 2), (3, 3)] {
            let gamma = 0.05;
            let spec = ModelSpec::Supertransfer {
                n_donors: n,
                m_acceptors: m,
                omega_a: 1.0,
                omega_b: 1.0,
                gamma,
            };
            let b = basis_for(&spec, Reduction::FullTensor);
            let h = build_hamiltonian(&spec, &b).unwrap().static_part;
            let donor = crate::statespace::QuantumState::symmetric_excitation(&b, DONORS).unwrap();
            let acceptor = crate::statespace::QuantumState::symmetric_excitation(&b, ACCEPTORS).unwrap();
            let elem = acceptor.amplitudes().dotc(&h.apply(donor.amplitudes()));
            assert!((elem.re - gamma * ((n * m) as f64).sqrt()).abs() < 1e-14);
            assert!(elem.im.abs() < 1e-15);
        }
    }

    #[test]
    fn supertransfer_single_pair_transfer_time() {
        // Two-site flip-flop: P_B(t) = sin²(γt); full transfer at t = π/(2γ).
        let gamma = 0.05;
        let t = std::f64::consts::PI / (2.0 * gamma);
        assert!((t - 31.4159).abs() < 1e-4);
        let spec = ModelSpec::Supertransfer {
            n_donors: 1,
            m_acceptors: 1,
            omega_a: 1.0,
            omega_b: 1.0,
            gamma,
        };
        let b = basis_for(&spec, Reduction::FullTensor);
        let h = build_hamiltonian(&spec, &b).unwrap().static_part.to_dense();
        // the |10⟩,|01⟩ block is [[-0? ...]] with off-diagonal γ: propagate with the exact 2x2 exponential
        let i10 = 2;
        let i01 = 1;
        assert!((h[(i01, i10)].re - gamma).abs() < 1e-15);
        assert!((h[(i10, i10)] - h[(i01, i01)]).norm() < 1e-15);
        let p = (gamma * t).sin().powi(2);
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn driven_battery_on_resonance_has_no_static_bare_energy() {
        let spec = ModelSpec::DrivenBattery {
            n_tls: 3,
            omega0: 1.0,
            omega: 2.0,
            omega_l: 2.0,
            g: 0.0,
            eta0: 0.5,
            sigma_pulse: 1.0,
            t0: 3.0,
            fock_cutoff: 3,
        };
        for red in [Reduction::FullTensor, Reduction::CollectiveSpin] {
            let m = build(&spec, red);
            assert_eq!(m.static_part.max_abs(), 0.0);
            let d = m.drive.as_ref().unwrap();
            for t in [0.0, 2.5, 3.0, 4.1] {
                assert!(m.at(t).hermiticity_defect() < 1e-12);
            }
            assert!(d.operator.is_hermitian());
        }
    }

    #[test]
    fn every_family_builds_hermitian() {
        let specs = vec![
            ModelSpec::Rabi {
                omega0: 0.5,
                omega: 1.0,
                g: 0.3,
                fock_cutoff: 3,
            },
            jc(0.5, 1.0, 0.3, 3),
            ModelSpec::Dicke {
                n_tls: 3,
                omega0: 0.5,
                omega: 1.0,
                g: 0.3,
                fock_cutoff: 3,
            },
            ModelSpec::TavisCummings {
                n_tls: 3,
                omega0: 0.5,
                omega: 1.0,
                g: 0.3,
                fock_cutoff: 3,
            },
            ModelSpec::Supertransfer {
                n_donors: 2,
                m_acceptors: 3,
                omega_a: 1.0,
                omega_b: 0.9,
                gamma: 0.1,
            },
            ModelSpec::DrivenBattery {
                n_tls: 2,
                omega0: 1.0,
                omega: 1.0,
                omega_l: 0.8,
                g: 0.1,
                eta0: 0.2,
                sigma_pulse: 0.5,
                t0: 1.0,
                fock_cutoff: 3,
            },
            ModelSpec::TwoEnsembleCavity {
                delta1: 0.1,
                delta2: -0.2,
                j: 0.3,
                delta: 0.05,
                g1: 0.2,
                g2: 0.25,
                n1: 4,
                n2: 9,
                kappa: None,
                fock_cutoff: 2,
            },
            ModelSpec::TwoQubitTransfer { gamma: 0.05 },
            ModelSpec::TransportChain {
                site_energies: vec![0.0, 1.0, 0.0],
                hopping: 1.0,
            },
        ];
        for spec in specs {
            for red in [Reduction::FullTensor, Reduction::CollectiveSpin] {
                let b = basis_for(&spec, red);
                match build_hamiltonian(&spec, &b) {
                    Ok(m) => {
                        assert!(m.static_part.is_hermitian(), "{}", spec.family());
                        assert!(m.static_part.hermiticity_defect() < 1e-12);
                    }
                    Err(e) => {
                        assert!(!spec.is_permutation_symmetric() && red == Reduction::CollectiveSpin, "{e}");
                    }
                }
            }
        }
    }

    #[test]
    fn excitation_commutators() {
        let spec = jc(0.5, 1.0, 0.1, 4);
        let b = basis_for(&spec, Reduction::FullTensor);
        let h = build_hamiltonian(&spec, &b).unwrap().static_part;
        let n = conserved_excitation_operator(&spec, &b).unwrap().unwrap();
        assert!(h.commutator(&n).unwrap().max_abs() < 1e-12);

        let tc = ModelSpec::TavisCummings {
            n_tls: 3,
            omega0: 0.5,
            omega: 1.0,
            g: 0.1,
            fock_cutoff: 3,
        };
        let b = basis_for(&tc, Reduction::FullTensor);
        let h = build_hamiltonian(&tc, &b).unwrap().static_part;
        let n = conserved_excitation_operator(&tc, &b).unwrap().unwrap();
        assert!(h.commutator(&n).unwrap().max_abs() < 1e-12);

        let rabi = ModelSpec::Rabi {
            omega0: 0.5,
            omega: 1.0,
            g: 0.1,
            fock_cutoff: 4,
        };
        let b = basis_for(&rabi, Reduction::FullTensor);
        assert!(conserved_excitation_operator(&rabi, &b).unwrap().is_none());
        let h = build_hamiltonian(&rabi, &b).unwrap().static_part;
        let n = total_excitation_operator(&b).unwrap();
        assert!(h.commutator(&n).unwrap().max_abs() > 0.05);
    }

    #[test]
    fn supertransfer_conserves_tls_excitations() {
        let spec = ModelSpec::Supertransfer {
            n_donors: 3,
            m_acceptors: 2,
            omega_a: 1.0,
            omega_b: 0.7,
            gamma: 0.1,
        };
        let b = basis_for(&spec, Reduction::FullTensor);
        let h = build_hamiltonian(&spec, &b).unwrap().static_part;
        let n = conserved_excitation_operator(&spec, &b).unwrap().unwrap();
        assert!(h.commutator(&n).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn mismatched_basis_is_rejected() {
        let spec = ModelSpec::TavisCummings {
            n_tls: 3,
            omega0: 0.5,
            omega: 1.0,
            g: 0.1,
            fock_cutoff: 2,
        };
        let wrong_n = Arc::new(Basis::new(BasisSpec::new(Reduction::FullTensor).ensemble(TLS, 2).mode(CAVITY, 2)).unwrap());
        assert!(matches!(build_hamiltonian(&spec, &wrong_n), Err(Error::ModelBasisMismatch(_))));
        let no_mode = Arc::new(Basis::new(BasisSpec::new(Reduction::FullTensor).ensemble(TLS, 3)).unwrap());
        assert!(build_hamiltonian(&spec, &no_mode).is_err());
        let chain = ModelSpec::TransportChain {
            site_energies: vec![0.0, 1.0],
            hopping: 1.0,
        };
        let coll = basis_for(&chain, Reduction::CollectiveSpin);
        assert!(matches!(build_hamiltonian(&chain, &coll), Err(Error::ModelBasisMismatch(_))));
    }

    #[test]
    fn zero_coupling_and_single_site_limits_build() {
        let spec = ModelSpec::TwoEnsembleCavity {
            delta1: 0.0,
            delta2: 0.0,
            j: 0.0,
            delta: 0.0,
            g1: 0.0,
            g2: 0.0,
            n1: 1,
            n2: 1,
            kappa: Some(0.0),
            fock_cutoff: 1,
        };
        assert_eq!(build(&spec, Reduction::FullTensor).static_part.max_abs(), 0.0);
    }

    #[test]
    fn two_ensemble_cavity_couplings_carry_sqrt_n() {
        let spec = ModelSpec::TwoEnsembleCavity {
            delta1: 0.0,
            delta2: 0.0,
            j: 0.0,
            delta: 0.0,
            g1: 0.1,
            g2: 0.2,
            n1: 16,
            n2: 9,
            kappa: None,
            fock_cutoff: 1,
        };
        let m = build(&spec, Reduction::FullTensor);
        let b = m.basis();
        // |G,G,1,0⟩ → |E1,G,0,0⟩ carries g1 √N1
        let photon1 = b.index_of(&crate::statespace::Configuration(vec![0, 0, 1, 0])).unwrap();
        let e1 = b.index_of(&crate::statespace::Configuration(vec![1, 0, 0, 0])).unwrap();
        assert!((m.static_part.get(e1, photon1).re - 0.4).abs() < 1e-15);
        let photon2 = b.index_of(&crate::statespace::Configuration(vec![0, 0, 0, 1])).unwrap();
        let e2 = b.index_of(&crate::statespace::Configuration(vec![0, 1, 0, 0])).unwrap();
        assert!((m.static_part.get(e2, photon2).re - 0.6).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn co_rotating_families_conserve_excitations(
                n in 1usize..5,
                w0 in 0.1f64..2.0,
                w in 0.1f64..2.0,
                g in 0.0f64..1.0,
                cut in 1usize..4,
                collective: bool,
            ) {
                let red = if collective { Reduction::CollectiveSpin } else { Reduction::FullTensor };
                let spec = ModelSpec::TavisCummings { n_tls: n, omega0: w0, omega: w, g, fock_cutoff: cut };
                let b = basis_for(&spec, red);
                let h = build_hamiltonian(&spec, &b).unwrap();
                prop_assert!(h.static_part.hermiticity_defect() < 1e-12);
                let n_exc = conserved_excitation_operator(&spec, &b).unwrap().unwrap();
                prop_assert!(h.static_part.commutator(&n_exc).unwrap().max_abs() < 1e-12);
            }

            #[test]
            fn counter_rotating_families_are_hermitian(
                n in 1usize..5,
                w0 in 0.1f64..2.0,
                w in 0.1f64..2.0,
                g in 0.01f64..1.0,
                cut in 1usize..4,
            ) {
                let spec = ModelSpec::Dicke { n_tls: n, omega0: w0, omega: w, g, fock_cutoff: cut };
                let b = basis_for(&spec, Reduction::FullTensor);
                let h = build_hamiltonian(&spec, &b).unwrap();
                prop_assert!(h.static_part.hermiticity_defect() < 1e-12);
                prop_assert!(conserved_excitation_operator(&spec, &b).unwrap().is_none());
                let n_exc = total_excitation_operator(&b).unwrap();
                prop_assert!(h.static_part.commutator(&n_exc).unwrap().max_abs() > 1e-3);
            }
        }
    }
}

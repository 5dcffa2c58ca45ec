//! Named observables.
//!
//! | label | operator |
//! |---|---|
//! | `identity` | `1` |
//! | `P_excited` | `Σ σ+σ− / N_total`, the excited fraction over all TLS |
//! | `photon_number[:mode]` | `a†a` (first mode by default) |
//! | `excitation[:ensemble]` | `Σ σ+σ−` (all ensembles by default) |
//! | `Jz[:ensemble]` | `Jz` (first ensemble by default) |
//! | `n_exc` | `Σ σ+σ− + Σ a†a` |
//! | `energy` | static Hamiltonian |
//! | `stored_energy` | excitation energy × `Σ σ+σ−` (battery-style families) |
//! | `acceptor_population` | `Σ σ+σ−` of the model's acceptor ensemble |
//! | `sink_population` | `Σ σ+σ−` of the `sink` ensemble |
//! | `population:<ensemble>:<site>` | `σ+σ−` on one site (full tensor) |

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::{total_excitation_operator, BuiltModel, ModelSpec, SINK};
use crate::statespace::{
    boson_operator, ensemble_operator, excitation_operator, single_site_operator, Basis, BosonOp, CollectiveOp,
    OperatorMatrix, QuantumState, SiteOp,
};

fn total_tls_excitation(basis: &Arc<Basis>) -> Result<OperatorMatrix> {
    let mut acc = OperatorMatrix::zero(basis);
    for e in &basis.spec().ensembles {
        acc = acc.add(&excitation_operator(basis, &e.label)?)?;
    }
    Ok(acc)
}

fn unknown(label: &str) -> Error {
    Error::UnknownLabel {
        kind: "observable",
        label: label.to_owned(),
    }
}

/// Resolves an observable label against a built model.
pub fn resolve_observable(label: &str, spec: &ModelSpec, model: &BuiltModel) -> Result<OperatorMatrix> {
    let b = model.basis();
    let (head, arg) = match label.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (label, None),
    };
    let first_ensemble = || {
        b.spec()
            .ensembles
            .first()
            .map(|e| e.label.clone())
            .ok_or_else(|| unknown(label))
    };
    let op = match (head, arg) {
        ("identity", None) => OperatorMatrix::identity(b),
        ("P_excited", None) => {
            let n = b.total_tls();
            if n == 0 {
                return Err(unknown(label));
            }
            total_tls_excitation(b)?.scale_real(1.0 / n as f64)
        }
        ("photon_number", m) => {
            let mode = match m {
                Some(m) => m.to_owned(),
                None => b.spec().modes.first().map(|m| m.label.clone()).ok_or_else(|| unknown(label))?,
            };
            boson_operator(b, &mode, BosonOp::N)?
        }
        ("excitation", None) => total_tls_excitation(b)?,
        ("excitation", Some(e)) => excitation_operator(b, e)?,
        ("Jz", e) => {
            let e = match e {
                Some(e) => e.to_owned(),
                None => first_ensemble()?,
            };
            ensemble_operator(b, &e, CollectiveOp::Jz)?
        }
        ("n_exc", None) => total_excitation_operator(b)?,
        ("energy", None) => model.static_part.clone(),
        ("stored_energy", None) => {
            let quantum = spec.excitation_energy().ok_or_else(|| {
                Error::InvalidArgument(format!("stored_energy is undefined for family `{}`", spec.family()))
            })?;
            total_tls_excitation(b)?.scale_real(quantum)
        }
        ("acceptor_population", None) => {
            let e = spec.acceptor_ensemble().ok_or_else(|| {
                Error::InvalidArgument(format!("family `{}` has no acceptor ensemble", spec.family()))
            })?;
            excitation_operator(b, e)?
        }
        ("sink_population", None) => excitation_operator(b, SINK)?,
        ("population", Some(rest)) => {
            let (e, site) = rest.split_once(':').ok_or_else(|| unknown(label))?;
            let site: usize = site.parse().map_err(|_| unknown(label))?;
            let sp = single_site_operator(b, e, site, SiteOp::SPlus)?;
            let sm = single_site_operator(b, e, site, SiteOp::SMinus)?;
            sp.matmul(&sm)?
        }
        _ => return Err(unknown(label)),
    };
    Ok(op)
}

/// `⟨ψ|A|ψ⟩` for a Hermitian observable.
pub fn measure(op: &OperatorMatrix, state: &QuantumState) -> Result<f64> {
    state.expectation(op)
}

/// Resolves `label` and measures it on `state`.
pub fn measure_label(label: &str, spec: &ModelSpec, model: &BuiltModel, state: &QuantumState) -> Result<f64> {
    let op = resolve_observable(label, spec, model)?;
    if !op.is_hermitian() {
        return Err(Error::NonHermitian(label.to_owned()));
    }
    state.expectation(&op)
}

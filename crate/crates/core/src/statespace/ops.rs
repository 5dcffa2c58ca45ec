//! Elementary operators: Pauli and ladder operators on single sites,
//! collective spin operators, boson operators and tensor embedding.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::basis::{Basis, FactorKind, Reduction};
use super::operator::OperatorMatrix;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteOp {
    Sx,
    Sy,
    Sz,
    #[serde(rename = "s+")]
    SPlus,
    #[serde(rename = "s-")]
    SMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollectiveOp {
    Jz,
    #[serde(rename = "J+")]
    JPlus,
    #[serde(rename = "J-")]
    JMinus,
    Jx,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BosonOp {
    A,
    ADag,
    N,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Operator acting on a single factor through `action(digit) -> [(new_digit, amplitude)]`
/// and as the identity elsewhere.
pub(crate) fn factor_operator<F>(basis: &Arc<Basis>, factor: usize, action: F) -> OperatorMatrix
where
    F: Fn(usize) -> Vec<(usize, C64)>,
{
    let dim_f = basis.factors()[factor].dim;
    let table: Vec<Vec<(usize, C64)>> = (0..dim_f).map(&action).collect();
    let mut triplets = Vec::with_capacity(basis.dim());
    for col in 0..basis.dim() {
        let d = basis.digit(col, factor);
        for &(d2, amp) in &table[d] {
            triplets.push((basis.with_digit(col, factor, d2), col, amp));
        }
    }
    OperatorMatrix::from_triplets(basis, triplets)
}

fn site_action(kind: SiteOp, bit: usize) -> impl Fn(usize) -> Vec<(usize, C64)> {
    let mask = 1usize << bit;
    move |d| {
        let excited = d & mask != 0;
        match kind {
            SiteOp::Sz => vec![(d, c(if excited { 1.0 } else { -1.0 }))],
            SiteOp::Sx => vec![(d ^ mask, c(1.0))],
            // σy = i|g⟩⟨e| − i|e⟩⟨g|
            SiteOp::Sy => vec![(d ^ mask, C64::new(0.0, if excited { 1.0 } else { -1.0 }))],
            SiteOp::SPlus if !excited => vec![(d | mask, c(1.0))],
            SiteOp::SMinus if excited => vec![(d & !mask, c(1.0))],
            _ => vec![],
        }
    }
}

/// Pauli or ladder operator on one site of a full-tensor ensemble.
pub fn single_site_operator(basis: &Arc<Basis>, ensemble: &str, site: usize, kind: SiteOp) -> Result<OperatorMatrix> {
    let (factor, n_tls) = basis.ensemble_factor(ensemble)?;
    if basis.reduction() != Reduction::FullTensor {
        return Err(Error::UnsupportedRepresentation(
            "single-site operators need a full_tensor basis; use collective_operator".into(),
        ));
    }
    if site >= n_tls {
        return Err(Error::InvalidArgument(format!(
            "site {site} out of range for ensemble `{ensemble}` with {n_tls} sites"
        )));
    }
    Ok(factor_operator(basis, factor, site_action(kind, n_tls - 1 - site)))
}

fn collective_action(kind: CollectiveOp, n: usize) -> impl Fn(usize) -> Vec<(usize, C64)> {
    let nf = n as f64;
    move |k| {
        let kf = k as f64;
        let up = || ((nf - kf) * (kf + 1.0)).sqrt();
        let down = || (kf * (nf - kf + 1.0)).sqrt();
        match kind {
            CollectiveOp::Jz => vec![(k, c(kf - nf / 2.0))],
            CollectiveOp::JPlus if k < n => vec![(k + 1, c(up()))],
            CollectiveOp::JMinus if k > 0 => vec![(k - 1, c(down()))],
            CollectiveOp::Jx => {
                let mut v = Vec::with_capacity(2);
                if k < n {
                    v.push((k + 1, c(0.5 * up())));
                }
                if k > 0 {
                    v.push((k - 1, c(0.5 * down())));
                }
                v
            }
            _ => vec![],
        }
    }
}

/// Collective spin operator of an ensemble in the symmetric (Dicke) basis,
/// with `J± |j,m⟩ = √(j(j+1) − m(m±1)) |j,m±1⟩` and `j = N/2`.
pub fn collective_operator(basis: &Arc<Basis>, ensemble: &str, kind: CollectiveOp) -> Result<OperatorMatrix> {
    let (factor, n_tls) = basis.ensemble_factor(ensemble)?;
    if basis.reduction() != Reduction::CollectiveSpin {
        return Err(Error::UnsupportedRepresentation(
            "collective_operator needs a collective_spin basis; use ensemble_operator".into(),
        ));
    }
    Ok(factor_operator(basis, factor, collective_action(kind, n_tls)))
}

/// Collective operator in either reduction: the direct Dicke-basis matrix for
/// collective bases, or the site sum (`Jz = ½Σσz`, `J± = Σσ±`, `Jx = ½Σσx`)
/// for full-tensor bases.
pub fn ensemble_operator(basis: &Arc<Basis>, ensemble: &str, kind: CollectiveOp) -> Result<OperatorMatrix> {
    let (factor, n_tls) = basis.ensemble_factor(ensemble)?;
    match basis.reduction() {
        Reduction::CollectiveSpin => Ok(factor_operator(basis, factor, collective_action(kind, n_tls))),
        Reduction::FullTensor => {
            let n = n_tls;
            Ok(factor_operator(basis, factor, move |d| {
                let mut out: Vec<(usize, C64)> = Vec::new();
                for bit in 0..n {
                    let mask = 1usize << bit;
                    let excited = d & mask != 0;
                    match kind {
                        CollectiveOp::Jz => {
                            let v = if excited { 0.5 } else { -0.5 };
                            match out.first_mut() {
                                Some(e) => e.1 += c(v),
                                None => out.push((d, c(v))),
                            }
                        }
                        CollectiveOp::JPlus if !excited => out.push((d | mask, c(1.0))),
                        CollectiveOp::JMinus if excited => out.push((d & !mask, c(1.0))),
                        CollectiveOp::Jx => out.push((d ^ mask, c(0.5))),
                        _ => {}
                    }
                }
                out
            }))
        }
    }
}

/// Number of excitations `Σ σ+σ−` in one ensemble (either reduction).
pub fn excitation_operator(basis: &Arc<Basis>, ensemble: &str) -> Result<OperatorMatrix> {
    let (factor, _) = basis.ensemble_factor(ensemble)?;
    let b = Arc::clone(basis);
    Ok(factor_operator(basis, factor, move |d| {
        vec![(d, c(b.excitations_in_digit(d) as f64))]
    }))
}

/// Ladder or number operator of a truncated mode. `a†` annihilates the
/// cutoff level.
pub fn boson_operator(basis: &Arc<Basis>, mode: &str, kind: BosonOp) -> Result<OperatorMatrix> {
    let (factor, cutoff) = basis.mode_factor(mode)?;
    Ok(factor_operator(basis, factor, move |n| match kind {
        BosonOp::A if n > 0 => vec![(n - 1, c((n as f64).sqrt()))],
        BosonOp::ADag if n < cutoff => vec![(n + 1, c(((n + 1) as f64).sqrt()))],
        BosonOp::N => vec![(n, c(n as f64))],
        _ => vec![],
    }))
}

/// Embeds an operator defined on a sub-basis (a subset of the target's
/// factors, matched by label and dimension) into the target basis, acting as
/// the identity on the remaining factors.
pub fn tensor_embed(op: &OperatorMatrix, target: &Arc<Basis>) -> Result<OperatorMatrix> {
    let sub = op.basis();
    if sub.reduction() != target.reduction() && !sub.spec().ensembles.is_empty() {
        return Err(Error::BasisMismatch);
    }
    let mut map = Vec::with_capacity(sub.factors().len());
    for f in sub.factors() {
        let idx = target.factor_index(&f.label).ok_or(Error::BasisMismatch)?;
        let tf = &target.factors()[idx];
        let same_kind = matches!(
            (f.kind, tf.kind),
            (FactorKind::Ensemble { .. }, FactorKind::Ensemble { .. }) | (FactorKind::Mode { .. }, FactorKind::Mode { .. })
        );
        if tf.dim != f.dim || !same_kind {
            return Err(Error::BasisMismatch);
        }
        map.push(idx);
    }
    let csr = op.to_csr();
    let mut by_col: Vec<Vec<(usize, C64)>> = vec![Vec::new(); sub.dim()];
    for (r, col, v) in csr.iter() {
        by_col[col].push((r, v));
    }
    let mut triplets = Vec::new();
    for col in 0..target.dim() {
        let mut s = 0;
        for (sf, &tf) in sub.factors().iter().zip(&map) {
            s += target.digit(col, tf) * sf.stride;
        }
        for &(r, v) in &by_col[s] {
            let mut row = col;
            for (si, &tf) in map.iter().enumerate() {
                row = target.with_digit(row, tf, sub.digit(r, si));
            }
            triplets.push((row, col, v));
        }
    }
    Ok(OperatorMatrix::from_triplets(target, triplets))
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Isometry `V` (full dimension × collective dimension) mapping each Dicke
/// state `|j = N/2, m⟩` of a collective basis to the normalized symmetric
/// superposition of full-tensor configurations with the same excitation
/// count. Mode factors map one-to-one. `V† H_full V` is the collective
/// representation of any permutation-symmetric `H_full`.
pub fn symmetric_isometry(collective: &Basis, full: &Basis) -> Result<CsrMatrix> {
    if collective.reduction() != Reduction::CollectiveSpin || full.reduction() != Reduction::FullTensor {
        return Err(Error::InvalidArgument(
            "symmetric_isometry maps a collective_spin basis into a full_tensor basis".into(),
        ));
    }
    let (cs, fs) = (collective.spec(), full.spec());
    if cs.ensembles != fs.ensembles || cs.modes != fs.modes {
        return Err(Error::BasisMismatch);
    }
    let nf = full.factors().len();
    let mut triplets = Vec::new();
    for row in 0..full.dim() {
        let mut col = 0;
        let mut amp = 1.0;
        for f in 0..nf {
            let d = full.digit(row, f);
            let (digit, weight) = match full.factors()[f].kind {
                FactorKind::Ensemble { n_tls } => {
                    let k = d.count_ones() as usize;
                    (k, 1.0 / binomial(n_tls, k).sqrt())
                }
                FactorKind::Mode { .. } => (d, 1.0),
            };
            col += digit * collective.factors()[f].stride;
            amp *= weight;
        }
        triplets.push((row, col, c(amp)));
    }
    Ok(CsrMatrix::from_triplets(full.dim(), collective.dim(), triplets))
}

/// Restricts a full-tensor operator to the symmetric subspace: `V† A V`.
pub fn project_to_collective(op: &OperatorMatrix, collective: &Arc<Basis>) -> Result<OperatorMatrix> {
    let v = symmetric_isometry(collective, op.basis())?;
    let reduced = v.adjoint().matmul(&op.to_csr()).matmul(&v);
    Ok(OperatorMatrix::from_csr(collective, reduced))
}

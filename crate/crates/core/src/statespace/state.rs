use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::basis::{Basis, FactorKind, Reduction};
use super::operator::OperatorMatrix;
use crate::error::{Error, Result};

/// Normalization tolerance for pure states.
pub const NORM_TOL: f64 = 1e-10;

/// Named or explicit initial condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Every TLS in its ground state, every mode in vacuum.
    AllGround,
    /// All ground, one photon in the first mode.
    OnePhoton,
    /// Single excitation shared symmetrically over the first ensemble.
    SymmetricOneExcitation,
    /// Single symmetric excitation in the named ensemble.
    SymmetricExcitationIn(String),
    /// Every TLS excited, modes in vacuum.
    FullyExcited,
    /// Site bits (`0`/`1`, or `g`/`e`) for every TLS in declaration order,
    /// optionally followed by `;` and comma-separated mode occupations,
    /// e.g. `"10;0"`. Full-tensor bases only.
    Product(String),
    /// Raw `[re, im]` amplitudes in basis order; must be normalized.
    Amplitudes(Vec<[f64; 2]>),
}

/// Pure state over a basis.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    basis: Arc<Basis>,
    amplitudes: DVector<C64>,
}

impl QuantumState {
    /// Wraps amplitudes that are already normalized to within [`NORM_TOL`].
    pub fn new(basis: &Arc<Basis>, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm * norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            basis: Arc::clone(basis),
            amplitudes,
        })
    }

    pub fn normalized(basis: &Arc<Basis>, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(basis, amplitudes.unscale(norm))
    }

    pub(crate) fn from_raw(basis: &Arc<Basis>, amplitudes: DVector<C64>) -> Self {
        Self {
            basis: Arc::clone(basis),
            amplitudes,
        }
    }

    pub fn basis_state(basis: &Arc<Basis>, index: usize) -> Result<Self> {
        if index >= basis.dim() {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        let mut v = DVector::zeros(basis.dim());
        v[index] = C64::new(1.0, 0.0);
        Ok(Self::from_raw(basis, v))
    }

    pub fn from_initial(basis: &Arc<Basis>, init: &InitialState) -> Result<Self> {
        match init {
            InitialState::AllGround => Self::basis_state(basis, 0),
            InitialState::FullyExcited => {
                let mut idx = 0;
                for f in basis.factors() {
                    if let FactorKind::Ensemble { .. } = f.kind {
                        idx += (f.dim - 1) * f.stride;
                    }
                }
                Self::basis_state(basis, idx)
            }
            InitialState::OnePhoton => {
                let mode = basis.spec().modes.first().ok_or_else(|| {
                    Error::InvalidArgument("one_photon needs a basis with a mode".into())
                })?;
                let (f, cutoff) = basis.mode_factor(&mode.label)?;
                if cutoff < 1 {
                    return Err(Error::InvalidArgument("one_photon needs fock_cutoff >= 1".into()));
                }
                Self::basis_state(basis, basis.with_digit(0, f, 1))
            }
            InitialState::SymmetricOneExcitation => {
                let e = basis.spec().ensembles.first().ok_or_else(|| {
                    Error::InvalidArgument("symmetric_one_excitation needs an ensemble".into())
                })?;
                Self::symmetric_excitation(basis, &e.label.clone())
            }
            InitialState::SymmetricExcitationIn(label) => Self::symmetric_excitation(basis, label),
            InitialState::Product(s) => Self::product(basis, s),
            InitialState::Amplitudes(a) => {
                let v = DVector::from_iterator(a.len(), a.iter().map(|[re, im]| C64::new(*re, *im)));
                Self::new(basis, v)
            }
        }
    }

    /// `(1/√N) Σ_j σ+^j |G⟩` for one ensemble, everything else in its ground state.
    pub fn symmetric_excitation(basis: &Arc<Basis>, ensemble: &str) -> Result<Self> {
        let (f, n) = basis.ensemble_factor(ensemble)?;
        let mut v = DVector::zeros(basis.dim());
        match basis.reduction() {
            Reduction::CollectiveSpin => v[basis.with_digit(0, f, 1)] = C64::new(1.0, 0.0),
            Reduction::FullTensor => {
                let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
                for bit in 0..n {
                    v[basis.with_digit(0, f, 1 << bit)] = amp;
                }
            }
        }
        Ok(Self::from_raw(basis, v))
    }

    fn product(basis: &Arc<Basis>, s: &str) -> Result<Self> {
        if basis.reduction() != Reduction::FullTensor {
            return Err(Error::UnsupportedRepresentation(
                "product-string states need a full_tensor basis".into(),
            ));
        }
        let (sites, modes) = match s.split_once(';') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s.trim(), None),
        };
        let bits: Vec<bool> = sites
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '|' && *c != ',')
            .map(|c| match c {
                '0' | 'g' => Ok(false),
                '1' | 'e' => Ok(true),
                other => Err(Error::InvalidArgument(format!("bad site symbol `{other}` in product state"))),
            })
            .collect::<Result<_>>()?;
        if bits.len() != basis.total_tls() {
            return Err(Error::InvalidArgument(format!(
                "product state lists {} sites, basis has {}",
                bits.len(),
                basis.total_tls()
            )));
        }
        let mut idx = 0;
        let mut pos = 0;
        for f in basis.factors() {
            if let FactorKind::Ensemble { n_tls } = f.kind {
                let mut digit = 0;
                for &b in &bits[pos..pos + n_tls] {
                    digit = (digit << 1) | b as usize;
                }
                pos += n_tls;
                idx += digit * f.stride;
            }
        }
        if let Some(m) = modes.filter(|m| !m.is_empty()) {
            let occ: Vec<usize> = m
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad occupation `{x}`")))
                })
                .collect::<Result<_>>()?;
            let mode_factors: Vec<_> = basis
                .factors()
                .iter()
                .filter(|f| matches!(f.kind, FactorKind::Mode { .. }))
                .collect();
            if occ.len() != mode_factors.len() {
                return Err(Error::InvalidArgument(format!(
                    "product state lists {} occupations, basis has {} modes",
                    occ.len(),
                    mode_factors.len()
                )));
            }
            for (n, f) in occ.into_iter().zip(mode_factors) {
                if n >= f.dim {
                    return Err(Error::InvalidArgument(format!(
                        "occupation {n} exceeds cutoff of mode `{}`",
                        f.label
                    )));
                }
                idx += n * f.stride;
            }
        }
        Self::basis_state(basis, idx)
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// `⟨ψ|A|ψ⟩` for a Hermitian observable.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<f64> {
        check_observable(op, &self.basis)?;
        let z = self.amplitudes.dotc(&op.apply(&self.amplitudes));
        debug_assert!(z.im.abs() < 1e-10 * (1.0 + z.re.abs()));
        Ok(z.re)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            basis: Arc::clone(&self.basis),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

fn check_observable(op: &OperatorMatrix, basis: &Arc<Basis>) -> Result<()> {
    if **op.basis() != **basis {
        return Err(Error::BasisMismatch);
    }
    if !op.is_hermitian() {
        return Err(Error::NonHermitian("operator".into()));
    }
    Ok(())
}

/// Density operator over a basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    basis: Arc<Basis>,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(basis: &Arc<Basis>, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::InvalidArgument("density matrix dimension mismatch".into()));
        }
        Ok(Self {
            basis: Arc::clone(basis),
            matrix,
        })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    /// `Tr(ρA)` for a Hermitian observable.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<f64> {
        check_observable(op, &self.basis)?;
        let csr = op.to_csr();
        let mut z = C64::new(0.0, 0.0);
        for (r, c, v) in csr.iter() {
            z += v * self.matrix[(c, r)];
        }
        Ok(z.re)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

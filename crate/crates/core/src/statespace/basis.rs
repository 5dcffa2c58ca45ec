//! Composite Hilbert-space bases built from TLS ensembles and truncated boson modes.
//!
//! Conventions fixed for the whole crate:
//!
//! * Each two-level site has ground = index 0 and excited = index 1, so the
//!   Pauli `σz = diag(-1, +1)` in that order and `σ+` maps ground to excited.
//! * A full-tensor ensemble of `n` sites is one factor of dimension `2^n`
//!   whose digit is the bit string of excitations, site 0 most significant.
//! * A collective-spin ensemble is one factor of dimension `n + 1` whose digit
//!   `k` counts excitations; `m = k - n/2` runs from `-j` to `+j`.
//! * Factors are ordered ensembles first (declaration order), then modes; the
//!   first factor is the most significant digit of the global index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the total basis dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub label: String,
    pub n_tls: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub label: String,
    /// Highest retained occupation.
    pub fock_cutoff: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    #[default]
    FullTensor,
    CollectiveSpin,
}

/// Declarative description of a composite space.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    #[serde(default)]
    pub ensembles: Vec<EnsembleSpec>,
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
    #[serde(default)]
    pub reduction: Reduction,
}

impl BasisSpec {
    pub fn new(reduction: Reduction) -> Self {
        Self {
            ensembles: Vec::new(),
            modes: Vec::new(),
            reduction,
        }
    }

    pub fn ensemble(mut self, label: &str, n_tls: usize) -> Self {
        self.ensembles.push(EnsembleSpec {
            label: label.to_owned(),
            n_tls,
        });
        self
    }

    pub fn mode(mut self, label: &str, fock_cutoff: usize) -> Self {
        self.modes.push(ModeSpec {
            label: label.to_owned(),
            fock_cutoff,
        });
        self
    }

    /// True when no ensembles or modes are listed.
    pub fn is_empty(&self) -> bool {
        self.ensembles.is_empty() && self.modes.is_empty()
    }

    /// Expected total dimension, or `None` on integer overflow.
    pub fn dimension(&self) -> Option<u128> {
        let mut dim: u128 = 1;
        for e in &self.ensembles {
            let f = match self.reduction {
                Reduction::FullTensor => {
                    if e.n_tls >= 127 {
                        return None;
                    }
                    1u128 << e.n_tls
                }
                Reduction::CollectiveSpin => e.n_tls as u128 + 1,
            };
            dim = dim.checked_mul(f)?;
        }
        for m in &self.modes {
            dim = dim.checked_mul(m.fock_cutoff as u128 + 1)?;
        }
        Some(dim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    Ensemble { n_tls: usize },
    Mode { fock_cutoff: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub label: String,
    pub kind: FactorKind,
    pub dim: usize,
    pub stride: usize,
}

/// Per-factor digits of one basis state, in factor order.
///
/// For a full-tensor ensemble the digit is the excitation bit string (site 0
/// is the most significant bit); for a collective ensemble it is the number of
/// excitations; for a mode it is the occupation number.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration(pub Vec<usize>);

/// A validated basis with its enumerated index map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    spec: BasisSpec,
    factors: Vec<Factor>,
    dim: usize,
}

impl Basis {
    pub fn new(spec: BasisSpec) -> Result<Self> {
        Self::with_cap(spec, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(spec: BasisSpec, cap: usize) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in &spec.ensembles {
            if e.n_tls == 0 {
                return Err(Error::InvalidBasis(format!("ensemble `{}` has no sites", e.label)));
            }
            if !seen.insert(e.label.as_str()) {
                return Err(Error::InvalidBasis(format!("duplicate label `{}`", e.label)));
            }
        }
        for m in &spec.modes {
            if !seen.insert(m.label.as_str()) {
                return Err(Error::InvalidBasis(format!("duplicate label `{}`", m.label)));
            }
        }
        let dim = match spec.dimension() {
            Some(d) if d <= cap as u128 => d as usize,
            Some(d) => return Err(Error::Capacity { dim: d, cap }),
            None => return Err(Error::Capacity { dim: u128::MAX, cap }),
        };

        let mut factors: Vec<Factor> = spec
            .ensembles
            .iter()
            .map(|e| Factor {
                label: e.label.clone(),
                kind: FactorKind::Ensemble { n_tls: e.n_tls },
                dim: match spec.reduction {
                    Reduction::FullTensor => 1 << e.n_tls,
                    Reduction::CollectiveSpin => e.n_tls + 1,
                },
                stride: 0,
            })
            .chain(spec.modes.iter().map(|m| Factor {
                label: m.label.clone(),
                kind: FactorKind::Mode {
                    fock_cutoff: m.fock_cutoff,
                },
                dim: m.fock_cutoff + 1,
                stride: 0,
            }))
            .collect();
        let mut stride = 1;
        for f in factors.iter_mut().rev() {
            f.stride = stride;
            stride *= f.dim;
        }
        debug_assert_eq!(stride, dim);
        Ok(Self { spec, factors, dim })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn reduction(&self) -> Reduction {
        self.spec.reduction
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor_index(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn ensemble_factor(&self, label: &str) -> Result<(usize, usize)> {
        match self.factor_index(label).map(|i| (i, self.factors[i].kind)) {
            Some((i, FactorKind::Ensemble { n_tls })) => Ok((i, n_tls)),
            _ => Err(Error::UnknownLabel {
                kind: "ensemble",
                label: label.to_owned(),
            }),
        }
    }

    pub fn mode_factor(&self, label: &str) -> Result<(usize, usize)> {
        match self.factor_index(label).map(|i| (i, self.factors[i].kind)) {
            Some((i, FactorKind::Mode { fock_cutoff })) => Ok((i, fock_cutoff)),
            _ => Err(Error::UnknownLabel {
                kind: "mode",
                label: label.to_owned(),
            }),
        }
    }

    /// Total number of two-level sites across all ensembles.
    pub fn total_tls(&self) -> usize {
        self.spec.ensembles.iter().map(|e| e.n_tls).sum()
    }

    #[inline]
    pub fn digit(&self, index: usize, factor: usize) -> usize {
        let f = &self.factors[factor];
        (index / f.stride) % f.dim
    }

    #[inline]
    pub fn with_digit(&self, index: usize, factor: usize, digit: usize) -> usize {
        let f = &self.factors[factor];
        index - self.digit(index, factor) * f.stride + digit * f.stride
    }

    pub fn configuration(&self, index: usize) -> Configuration {
        assert!(index < self.dim, "index {index} out of range");
        Configuration((0..self.factors.len()).map(|f| self.digit(index, f)).collect())
    }

    pub fn index_of(&self, config: &Configuration) -> Result<usize> {
        if config.0.len() != self.factors.len() {
            return Err(Error::InvalidArgument(format!(
                "configuration has {} digits, basis has {} factors",
                config.0.len(),
                self.factors.len()
            )));
        }
        let mut idx = 0;
        for (f, &d) in self.factors.iter().zip(&config.0) {
            if d >= f.dim {
                return Err(Error::InvalidArgument(format!(
                    "digit {d} out of range for factor `{}`",
                    f.label
                )));
            }
            idx += d * f.stride;
        }
        Ok(idx)
    }

    /// Number of TLS excitations encoded by an ensemble digit.
    pub fn excitations_in_digit(&self, digit: usize) -> usize {
        match self.reduction() {
            Reduction::FullTensor => digit.count_ones() as usize,
            Reduction::CollectiveSpin => digit,
        }
    }
}

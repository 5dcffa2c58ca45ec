use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statespace::{BasisSpec, Reduction};

pub const TLS: &str = "tls";
pub const CAVITY: &str = "cavity";
pub const DONORS: &str = "donors";
pub const ACCEPTORS: &str = "acceptors";
pub const QUBIT_1: &str = "q1";
pub const QUBIT_2: &str = "q2";
pub const NUCLEI_1: &str = "E1";
pub const NUCLEI_2: &str = "E2";
pub const CAVITY_1: &str = "a1";
pub const CAVITY_2: &str = "a2";
pub const CHAIN: &str = "chain";
pub const SINK: &str = "sink";

/// Model families and their parameters. All frequencies and couplings are
/// angular frequencies in one shared unit with ħ = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `ω0 σz + ω a†a + g (a† + a) σx`
    Rabi {
        omega0: f64,
        omega: f64,
        g: f64,
        fock_cutoff: usize,
    },
    /// `ω0 σz + ω a†a + g (σ+ a + σ− a†)`
    JaynesCummings {
        omega0: f64,
        omega: f64,
        g: f64,
        fock_cutoff: usize,
    },
    /// `ω0 Σ σz^j + ω a†a + g Σ σx^j (a + a†)`
    Dicke {
        n_tls: usize,
        omega0: f64,
        omega: f64,
        g: f64,
        fock_cutoff: usize,
    },
    /// `ω0 Σ σz^j + ω a†a + g Σ (σ+^j a + σ−^j a†)`
    TavisCummings {
        n_tls: usize,
        omega0: f64,
        omega: f64,
        g: f64,
        fock_cutoff: usize,
    },
    /// `−ωA/2 Σ σz^j − ωB/2 Σ σz^k + γ Σ_jk (σ+^j σ−^k + σ−^j σ+^k)`
    Supertransfer {
        n_donors: usize,
        m_acceptors: usize,
        #[serde(alias = "omega_A")]
        omega_a: f64,
        #[serde(alias = "omega_B")]
        omega_b: f64,
        gamma: f64,
    },
    /// Rotating frame at the laser frequency:
    /// `Δ/2 Σ σz^j + Δ a†a + g Σ (a† σ−^j + a σ+^j) + i η(t) (a† − a)`, `Δ = ω − ωL`.
    /// `omega0` is the TLS transition energy used for the stored-energy readout.
    DrivenBattery {
        n_tls: usize,
        omega0: f64,
        omega: f64,
        omega_l: f64,
        g: f64,
        eta0: f64,
        sigma_pulse: f64,
        t0: f64,
        fock_cutoff: usize,
    },
    /// Two cavities, each coupled to one nuclear ensemble treated as a single
    /// collective transition with coupling `g_i √N_i`.
    TwoEnsembleCavity {
        delta1: f64,
        delta2: f64,
        #[serde(rename = "J")]
        j: f64,
        delta: f64,
        g1: f64,
        g2: f64,
        n1: usize,
        n2: usize,
        /// Driving strength; carried for bookkeeping only.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
        #[serde(default = "default_cutoff")]
        fock_cutoff: usize,
    },
    /// `γ (σ+¹ σ−² + σ−¹ σ+²)`
    TwoQubitTransfer { gamma: f64 },
    /// Single-excitation hopping chain with per-site energies, plus a sink site
    /// that only couples through dissipation:
    /// `Σ ε_i σ+^i σ−^i + J Σ_i (σ+^i σ−^{i+1} + h.c.)`.
    TransportChain { site_energies: Vec<f64>, hopping: f64 },
}

fn default_cutoff() -> usize {
    1
}

/// One schema violation: a dotted path relative to the model and a message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub const FAMILIES: &[&str] = &[
    "rabi",
    "jaynes_cummings",
    "dicke",
    "tavis_cummings",
    "supertransfer",
    "driven_battery",
    "two_ensemble_cavity",
    "two_qubit_transfer",
    "transport_chain",
];

impl ModelSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::Rabi { .. } => "rabi",
            ModelSpec::JaynesCummings { .. } => "jaynes_cummings",
            ModelSpec::Dicke { .. } => "dicke",
            ModelSpec::TavisCummings { .. } => "tavis_cummings",
            ModelSpec::Supertransfer { .. } => "supertransfer",
            ModelSpec::DrivenBattery { .. } => "driven_battery",
            ModelSpec::TwoEnsembleCavity { .. } => "two_ensemble_cavity",
            ModelSpec::TwoQubitTransfer { .. } => "two_qubit_transfer",
            ModelSpec::TransportChain { .. } => "transport_chain",
        }
    }

    /// True when the Hamiltonian keeps the counter-rotating terms.
    pub fn has_counter_rotating_terms(&self) -> bool {
        matches!(self, ModelSpec::Rabi { .. } | ModelSpec::Dicke { .. })
    }

    /// True when the Hamiltonian carries a time-dependent drive.
    pub fn is_driven(&self) -> bool {
        matches!(self, ModelSpec::DrivenBattery { .. })
    }

    /// True when the Hamiltonian is invariant under permutations of the sites
    /// within each ensemble, so a collective-spin basis is exact.
    pub fn is_permutation_symmetric(&self) -> bool {
        !matches!(self, ModelSpec::TransportChain { .. })
    }

    /// The basis layout the builder expects for this model.
    pub fn canonical_basis(&self, reduction: Reduction) -> BasisSpec {
        let b = BasisSpec::new(reduction);
        match *self {
            ModelSpec::Rabi { fock_cutoff, .. } | ModelSpec::JaynesCummings { fock_cutoff, .. } => {
                b.ensemble(TLS, 1).mode(CAVITY, fock_cutoff)
            }
            ModelSpec::Dicke { n_tls, fock_cutoff, .. }
            | ModelSpec::TavisCummings { n_tls, fock_cutoff, .. }
            | ModelSpec::DrivenBattery { n_tls, fock_cutoff, .. } => b.ensemble(TLS, n_tls).mode(CAVITY, fock_cutoff),
            ModelSpec::Supertransfer {
                n_donors, m_acceptors, ..
            } => b.ensemble(DONORS, n_donors).ensemble(ACCEPTORS, m_acceptors),
            ModelSpec::TwoEnsembleCavity { fock_cutoff, .. } => b
                .ensemble(NUCLEI_1, 1)
                .ensemble(NUCLEI_2, 1)
                .mode(CAVITY_1, fock_cutoff)
                .mode(CAVITY_2, fock_cutoff),
            ModelSpec::TwoQubitTransfer { .. } => b.ensemble(QUBIT_1, 1).ensemble(QUBIT_2, 1),
            ModelSpec::TransportChain { ref site_energies, .. } => {
                b.ensemble(CHAIN, site_energies.len().max(1)).ensemble(SINK, 1)
            }
        }
    }

    pub fn fock_cutoff(&self) -> Option<usize> {
        match *self {
            ModelSpec::Rabi { fock_cutoff, .. }
            | ModelSpec::JaynesCummings { fock_cutoff, .. }
            | ModelSpec::Dicke { fock_cutoff, .. }
            | ModelSpec::TavisCummings { fock_cutoff, .. }
            | ModelSpec::DrivenBattery { fock_cutoff, .. }
            | ModelSpec::TwoEnsembleCavity { fock_cutoff, .. } => Some(fock_cutoff),
            _ => None,
        }
    }

    /// Ensemble size driving a collective-scaling sweep.
    pub fn ensemble_size(&self) -> Option<usize> {
        match *self {
            ModelSpec::Dicke { n_tls, .. }
            | ModelSpec::TavisCummings { n_tls, .. }
            | ModelSpec::DrivenBattery { n_tls, .. } => Some(n_tls),
            ModelSpec::Supertransfer { n_donors, .. } => Some(n_donors),
            ModelSpec::TwoEnsembleCavity { n1, .. } => Some(n1),
            _ => None,
        }
    }

    /// Copy with the ensemble size replaced. Supertransfer sets `N = M = n`;
    /// the two-ensemble cavity sets `N1 = N2 = n`.
    pub fn with_ensemble_size(&self, n: usize) -> Result<Self> {
        let mut out = self.clone();
        match &mut out {
            ModelSpec::Dicke { n_tls, .. }
            | ModelSpec::TavisCummings { n_tls, .. }
            | ModelSpec::DrivenBattery { n_tls, .. } => *n_tls = n,
            ModelSpec::Supertransfer {
                n_donors, m_acceptors, ..
            } => {
                *n_donors = n;
                *m_acceptors = n;
            }
            ModelSpec::TwoEnsembleCavity { n1, n2, .. } => {
                *n1 = n;
                *n2 = n;
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "family `{}` has no ensemble size to sweep",
                    other.family()
                )))
            }
        }
        Ok(out)
    }

    /// Energy stored per TLS excitation, for the battery-style families.
    /// Families written with `ω0 σz` have a level splitting of `2 ω0`.
    pub fn excitation_energy(&self) -> Option<f64> {
        match *self {
            ModelSpec::Rabi { omega0, .. }
            | ModelSpec::JaynesCummings { omega0, .. }
            | ModelSpec::Dicke { omega0, .. }
            | ModelSpec::TavisCummings { omega0, .. } => Some(2.0 * omega0),
            ModelSpec::DrivenBattery { omega0, .. } => Some(omega0),
            _ => None,
        }
    }

    /// Ensemble whose excitation counts as "transferred".
    pub fn acceptor_ensemble(&self) -> Option<&'static str> {
        match self {
            ModelSpec::Supertransfer { .. } => Some(ACCEPTORS),
            ModelSpec::TwoQubitTransfer { .. } => Some(QUBIT_2),
            ModelSpec::TwoEnsembleCavity { .. } => Some(NUCLEI_2),
            ModelSpec::TransportChain { .. } => Some(SINK),
            _ => None,
        }
    }

    /// Parameter checks; an empty list means the spec is buildable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut count = |name: &str, x: usize| {
            if x < 1 {
                v.push(Violation::new(name, "must be at least 1"));
            }
        };
        match *self {
            ModelSpec::Dicke { n_tls, .. } | ModelSpec::TavisCummings { n_tls, .. } => count("n_tls", n_tls),
            ModelSpec::DrivenBattery { n_tls, .. } => count("n_tls", n_tls),
            ModelSpec::Supertransfer {
                n_donors, m_acceptors, ..
            } => {
                count("n_donors", n_donors);
                count("m_acceptors", m_acceptors);
            }
            ModelSpec::TwoEnsembleCavity { n1, n2, .. } => {
                count("n1", n1);
                count("n2", n2);
            }
            ModelSpec::TransportChain { ref site_energies, .. } => count("site_energies", site_energies.len()),
            _ => {}
        }
        if let Some(c) = self.fock_cutoff() {
            if c < 1 {
                v.push(Violation::new("fock_cutoff", "must be at least 1 when a mode exists"));
            }
        }
        let mut nonneg = |name: &str, x: f64| {
            if !(x >= 0.0) || !x.is_finite() {
                v.push(Violation::new(name, format!("must be a finite non-negative number, got {x}")));
            }
        };
        match *self {
            ModelSpec::Rabi { g, .. }
            | ModelSpec::JaynesCummings { g, .. }
            | ModelSpec::Dicke { g, .. }
            | ModelSpec::TavisCummings { g, .. } => nonneg("g", g),
            ModelSpec::Supertransfer { gamma, .. } | ModelSpec::TwoQubitTransfer { gamma } => nonneg("gamma", gamma),
            ModelSpec::DrivenBattery {
                g, eta0, sigma_pulse, ..
            } => {
                nonneg("g", g);
                nonneg("eta0", eta0);
                if !(sigma_pulse > 0.0) {
                    v.push(Violation::new("sigma_pulse", "must be positive"));
                }
            }
            ModelSpec::TwoEnsembleCavity { g1, g2, kappa, .. } => {
                nonneg("g1", g1);
                nonneg("g2", g2);
                if let Some(k) = kappa {
                    nonneg("kappa", k);
                }
            }
            ModelSpec::TransportChain { hopping, .. } => nonneg("hopping", hopping),
        }
        let finite = self.real_parameters().into_iter().filter(|(_, x)| !x.is_finite());
        v.extend(finite.map(|(name, _)| Violation::new(name, "must be finite")));
        v
    }

    fn real_parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ModelSpec::Rabi { omega0, omega, .. }
            | ModelSpec::JaynesCummings { omega0, omega, .. }
            | ModelSpec::Dicke { omega0, omega, .. }
            | ModelSpec::TavisCummings { omega0, omega, .. } => vec![("omega0", omega0), ("omega", omega)],
            ModelSpec::Supertransfer { omega_a, omega_b, .. } => vec![("omega_a", omega_a), ("omega_b", omega_b)],
            ModelSpec::DrivenBattery {
                omega0, omega, omega_l, t0, ..
            } => vec![("omega0", omega0), ("omega", omega), ("omega_l", omega_l), ("t0", t0)],
            ModelSpec::TwoEnsembleCavity {
                delta1, delta2, j, delta, ..
            } => vec![("delta1", delta1), ("delta2", delta2), ("J", j), ("delta", delta)],
            ModelSpec::TwoQubitTransfer { .. } => vec![],
            ModelSpec::TransportChain { ref site_energies, .. } => {
                site_energies.iter().map(|&e| ("site_energies", e)).collect()
            }
        }
    }
}

/// Gaussian drive envelope `η(t) = η0 / (σ√(2π)) · exp(−½((t − t0)/σ)²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveEnvelope {
    pub eta0: f64,
    pub sigma_pulse: f64,
    pub t0: f64,
}

impl DriveEnvelope {
    pub fn new(eta0: f64, sigma_pulse: f64, t0: f64) -> Result<Self> {
        if !(sigma_pulse > 0.0) {
            return Err(Error::InvalidArgument("sigma_pulse must be positive".into()));
        }
        Ok(Self { eta0, sigma_pulse, t0 })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.sigma_pulse;
        self.eta0 / (self.sigma_pulse * (2.0 * std::f64::consts::PI).sqrt()) * (-0.5 * x * x).exp()
    }
}

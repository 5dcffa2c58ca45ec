//! Hamiltonian builders for the model families.
//!
//! Sign conventions follow each family's standard printed form:
//!
//! | family | TLS term | level splitting |
//! |---|---|---|
//! | rabi, jaynes_cummings, dicke, tavis_cummings | `+ω0 σz` | `2 ω0` |
//! | supertransfer | `−ωA/2 σz`, `−ωB/2 σz` | `−ωA`, `−ωB` |
//! | driven_battery (rotating frame) | `+(ω − ωL)/2 σz` | `ω − ωL` |
//! | two_ensemble_cavity | `−Δ |E⟩⟨E|` | `−Δ` |
//! | transport_chain | `ε_i σ+σ−` | `ε_i` |

mod build;
mod spec;

pub use build::{
    build_hamiltonian, check_compatible, conserved_excitation_operator, total_excitation_operator, BuiltModel, Drive,
};
pub(crate) use build::assemble;
pub use spec::*;

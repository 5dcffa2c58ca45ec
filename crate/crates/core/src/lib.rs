//! Numerical laboratory for Dicke-family Hamiltonians.
//!
//! * [`statespace`]: bases, operators and states
//! * [`models`]: Hamiltonian builders for each model family
//! * [`dynamics`]: closed and Lindblad evolution with observable records
//! * [`scaling`]: ensemble-size sweeps and power-law fits
//! * [`energetics`]: energy-density and transfer-rate calculators

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod energetics;
pub mod error;
pub mod models;
pub mod scaling;
pub mod statespace;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

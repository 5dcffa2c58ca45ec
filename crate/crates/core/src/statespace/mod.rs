//! Hilbert-space bases, states and the elementary operators every model is
//! assembled from.

mod basis;
mod operator;
mod ops;
pub mod sparse;
mod state;

pub use basis::{
    Basis, BasisSpec, Configuration, EnsembleSpec, Factor, FactorKind, ModeSpec, Reduction, DEFAULT_DIMENSION_CAP,
};
pub use operator::{OperatorMatrix, Storage, HERMITIAN_TOL, SPARSE_THRESHOLD};
pub use ops::{
    boson_operator, collective_operator, ensemble_operator, excitation_operator, project_to_collective,
    single_site_operator, symmetric_isometry, tensor_embed, BosonOp, CollectiveOp, SiteOp,
};
pub use state::{DensityMatrix, InitialState, QuantumState, NORM_TOL};

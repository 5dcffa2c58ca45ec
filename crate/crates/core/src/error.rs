use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis dimension {dim} exceeds the capacity cap of {cap}")]
    Capacity { dim: u128, cap: usize },

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("unknown {kind} label `{label}`")]
    UnknownLabel { kind: &'static str, label: String },

    #[error("unsupported representation: {0}")]
    UnsupportedRepresentation(String),

    #[error("operands live on different bases")]
    BasisMismatch,

    #[error("model/basis mismatch: {0}")]
    ModelBasisMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("observable `{0}` is not Hermitian")]
    NonHermitian(String),

    #[error(
        "Fock truncation leak on mode `{mode}`: {leak:.3e} exceeds {threshold:.1e} at t = {time}; \
         increase fock_cutoff above {cutoff}"
    )]
    TruncationLeak {
        mode: String,
        leak: f64,
        threshold: f64,
        cutoff: usize,
        time: f64,
    },

    #[error("step size underflow at t = {time} (h = {step:e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("density-operator dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("transfer efficiency requires a sink noise entry")]
    MissingSink,

    #[error("metric could not be extracted: {0}")]
    Metric(String),

    #[error("sweep failed for N = {}: {}", .failures.iter().map(|(n, _)| n.to_string()).collect::<Vec<_>>().join(", "), .failures.iter().map(|(n, m)| format!("[N={n}] {m}")).collect::<Vec<_>>().join("; "))]
    SweepFailed { failures: Vec<(usize, String)> },

    #[error("invalid energetics input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures raised by the numerics rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TruncationLeak { .. } | Error::StepUnderflow { .. } | Error::Metric(_) | Error::SweepFailed { .. }
        )
    }
}

use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("direction has norm {norm}, expected a unit vector")]
    InvalidDirection { norm: f64 },

    #[error("measurement frame axes are not orthogonal (dot product {dot})")]
    NonOrthogonalFrame { dot: f64 },

    #[error("setting vectors are parallel or anti-parallel; no frame can be derived")]
    DegenerateSettings,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{requested} qubits requested, limit is {limit}")]
    TooManyQubits { requested: usize, limit: usize },

    #[error("invalid qubit selection: {0}")]
    InvalidQubits(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unknown named state `{0}`")]
    UnknownState(String),

    #[error("visibility {0} outside the Werner range [-1/3, 1]")]
    VisibilityOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid Bell scenario: {0}")]
    InvalidScenario(String),

    #[error("region {region} uses {settings} settings but only has {sites} sites")]
    BudgetExceeded {
        region: usize,
        settings: usize,
        sites: usize,
    },

    #[error("scenario has {strategies} deterministic strategies, cap is {cap}")]
    ScenarioTooLarge { strategies: u128, cap: u128 },

    #[error("pairwise and effective-state routes disagree: {pairwise} vs {effective}")]
    InconsistentRoutes { pairwise: f64, effective: f64 },

    #[error("missing correlation for setting tuple {0:?}")]
    MissingCorrelation(alloc::vec::Vec<usize>),

    #[error("construction failed verification: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = core::result::Result<T, Error>;

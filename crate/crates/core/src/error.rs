use thiserror::Error;

/// Errors produced by the ctq-core routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("keep set for partial trace is empty")]
    EmptyKeepSet,

    #[error("subsystem index {index} out of range for {parts} parts")]
    SubsystemOutOfRange { index: usize, parts: usize },

    #[error("state vector has zero norm")]
    ZeroVector,

    #[error("state is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("fidelity {0} outside [0, 1]")]
    FidelityOutOfRange(f64),

    #[error("fidelity {fidelity} is at or below the separable boundary 1/{d}")]
    FidelityBelowSeparableBoundary { fidelity: f64, d: usize },

    #[error("parameter {name} = {value} out of range")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("rank {rank} exceeds dimension {dim}")]
    RankTooLarge { rank: usize, dim: usize },

    #[error("invalid exponent {value}: {reason}")]
    BadExponent { value: f64, reason: &'static str },

    #[error("invalid dimension {0}")]
    BadDimension(usize),

    #[error("exponent q = {q} outside the range where the result is proved ({range})")]
    ExponentOutsideTheoremRange { q: f64, range: &'static str },

    #[error("exponent order violated: q = {q} < h = {h}")]
    ExponentOrderViolated { q: f64, h: f64 },

    #[error("unequal local dimensions {da} x {db}")]
    UnequalLocalDims { da: usize, db: usize },

    #[error("expected a two-qubit state, got dims {0:?}")]
    WrongDimensions(Vec<usize>),

    #[error("all subsystems must be qubits, got dims {0:?}")]
    NotAllQubits(Vec<usize>),

    #[error("value {0} outside the domain [0, 1]")]
    DomainError(f64),

    #[error("not a probability distribution")]
    NotADistribution,

    #[error("grid has {0} points; at least 3 are required")]
    GridTooCoarse(usize),

    #[error("root not bracketed on [{lo}, {hi}]")]
    RootNotBracketed { lo: f64, hi: f64 },

    #[error("constraint set is infeasible: {0}")]
    InfeasibleConstraint(&'static str),

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error("state file: {0}")]
    StateFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

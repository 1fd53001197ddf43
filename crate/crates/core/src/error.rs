use thiserror::Error;

/// Errors raised by the model, the generators and the samplers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("system must have at least one mode")]
    NoModes,
    #[error("{field} has length {got}, expected {expected}")]
    Shape {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("coupling is not Hermitian at ({row}, {col})")]
    NonHermitian { row: usize, col: usize },
    #[error("diagonal coupling V[{0}][{0}] must be zero")]
    DiagonalCoupling(usize),
    #[error("negative rate: {field}[{index}]")]
    NegativeRate { field: &'static str, index: usize },
    #[error("non-finite value: {field}[{index}]")]
    NonFinite { field: &'static str, index: usize },
    #[error("negative truncation parameter {0}")]
    NegativeTruncation(i64),
    #[error("invalid truncation: {0}")]
    Truncation(String),
    #[error("statistics mismatch: {0}")]
    StatisticsMismatch(String),
    #[error("undefined rate for pair ({0}, {1}): gamma and detuning both vanish with nonzero coupling")]
    UndefinedRate(usize, usize),
    #[error("Zeno limit undefined for pair ({0}, {1}): zero dephasing")]
    ZenoUndefined(usize, usize),
    #[error("pump/loss not supported: {0}")]
    PumpLossUnsupported(String),
    #[error("dimension {dim} exceeds the dense limit {limit}; use the classical or Monte-Carlo path")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid initial state: {0}")]
    InvalidState(String),
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("NaN encountered at t = {0}")]
    NotANumber(f64),
    #[error("truncation leakage {leakage:e} exceeds {limit:e} at t = {t}")]
    Leakage { t: f64, leakage: f64, limit: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("stationary distribution is not unique: closed classes {0:?}")]
    NotUnique(Vec<Vec<usize>>),
    #[error("singular linear system")]
    Singular,
    #[error("absorbing state: total exit rate is zero")]
    Absorbing,
    #[error("no stationary state: {0}")]
    NoStationaryState(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("threshold undefined: {0}")]
    ThresholdUndefined(String),
    #[error("mean occupation left [0, 1] at t = {t} (value {value})")]
    FermionBounds { t: f64, value: f64 },
    #[error("pole at eta = lambda_{0} in the closed-form density")]
    DensityPole(usize),
    #[error("burn-in {burn_in} exceeds trajectory length {length}")]
    BurnIn { burn_in: f64, length: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

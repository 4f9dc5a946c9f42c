use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("period list is empty")]
    EmptyPeriods,
    #[error("periods must be positive, got {0}")]
    ZeroPeriod(usize),
    #[error("periods q{i}={qi} and q{j}={qj} are not coprime")]
    CoprimalityViolation {
        i: usize,
        j: usize,
        qi: usize,
        qj: usize,
    },
    #[error("multi-index {index:?} out of range for periods {periods:?}")]
    OutOfRange {
        index: Vec<i64>,
        periods: Vec<usize>,
    },
    #[error("coordinate {0} out of range")]
    BadCoordinate(usize),
    #[error("block {0} out of range")]
    BadBlock(usize),
    #[error("invalid pattern: {0}")]
    BadPattern(String),
    #[error("spectral parameter z_{0} is zero")]
    ZeroSpectralParameter(usize),
    #[error("|Im k_{0}| exceeds the cap of {1}")]
    ImaginaryPartTooLarge(usize, f64),
    #[error("evaluator exceeds declared degree bounds (residual {residual:e})")]
    DegreeBoundViolation { residual: f64 },
    #[error("evaluation point has a zero coordinate")]
    ZeroPoint,
    #[error("variable count mismatch: {0} vs {1}")]
    VariableMismatch(usize, usize),
    #[error("potential is not separable for {pattern} (worst coefficient {worst:e})")]
    NotSeparable { pattern: String, worst: f64 },
    #[error("decomposition support does not match lattice: {0}")]
    SupportMismatch(String),
    #[error("potentials live on different lattices")]
    LatticeMismatch,
    #[error("invalid isospectrality spec: {0}")]
    BadSpec(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("could not draw an admissible sample after {0} retries")]
    DegenerateSampling(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised while building networks or evaluating operators on them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("network must contain at least one state")]
    EmptyNetwork,

    #[error("duplicate state identifier `{0}`")]
    DuplicateState(String),

    #[error("unknown state identifier `{0}`")]
    UnknownState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("base mass of state {0} is not strictly positive")]
    NonpositiveMass(usize),

    #[error("negative coupling W[{i}][{j}] = {value}")]
    NegativeCoupling { i: usize, j: usize, value: f64 },

    #[error("coupling is not symmetric at ({i}, {j}): {wij} vs {wji}")]
    AsymmetricCoupling { i: usize, j: usize, wij: f64, wji: f64 },

    #[error("state {0} has zero conductance (empty row of W)")]
    ZeroConductance(usize),

    #[error("reweighting factor at state {0} is not strictly positive")]
    NonpositiveWeight(usize),

    #[error("state index {index} out of range for a network of {len} states")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("target set is empty")]
    EmptyTargetSet,

    #[error("set #{0} of the family is empty")]
    EmptySet(usize),

    #[error("dipole sets are unbalanced: masses {lhs} and {rhs}")]
    UnbalancedSets { lhs: f64, rhs: f64 },

    #[error("dipole system is singular: sets meet component {component} with nonzero net charge")]
    SingularSystem { component: usize },

    #[error("boundary must contain at least one state")]
    EmptyBoundary,

    #[error("interior state {0} cannot reach the boundary")]
    TrappedInterior(usize),

    #[error("set meets the boundary at state {0}")]
    SetMeetsBoundary(usize),

    #[error("kernel `{0}` requires a boundary")]
    MissingBoundary(&'static str),

    #[error("function lies outside the indicator span of the family (residual energy {0})")]
    FamilyTooSmall(f64),

    #[error("regularization weight must be nonnegative, got {0}")]
    NegativeGamma(f64),

    #[error("system matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("map does not preserve the base measure at state {0}")]
    NotMeasurePreserving(usize),

    #[error("joining measure is not symmetric at pair ({i}, {j})")]
    SymmetryViolation { i: usize, j: usize },

    #[error("probability base measure must have total mass 1, got {0}")]
    NotProbability(f64),

    #[error("Monte Carlo estimate needs at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("path sampling needs at least one step and one path")]
    EmptyBatch,

    #[error("iterative solver did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("unsupported schema `{0}`, expected `mlap-net/1`")]
    SchemaVersion(String),

    #[error("I/O error: {0}")]
    Io(String),
}

/// Problems found while reading a network file.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("edge ({0}, {1}) has negative weight")]
    NegativeWeight(String, String),

    #[error("edge ({0}, {1}) is listed more than once")]
    DuplicateEdge(String, String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

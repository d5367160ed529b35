use thiserror::Error;

/// Failures of the fixed-point power-flow iteration.
///
/// Divergence is an expected outcome near the edge of solvability, so it is
/// kept separate from input errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowerFlowError {
    #[error("fixed-point iteration diverged after {iterations} iterations (update norm {update_norm:.3e})")]
    Diverged { iterations: usize, update_norm: f64 },
    #[error("iterate entry {index} reached zero at iteration {iteration}")]
    ZeroCrossing { iteration: usize, index: usize },
    #[error("invalid power-flow input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network document: {0}")]
    Document(String),
    #[error("network must contain exactly one slack bus, found {0}")]
    SlackCount(usize),
    #[error("line {line} references unknown bus `{bus}`")]
    DanglingLine { line: usize, bus: String },
    #[error("unknown bus `{0}`")]
    UnknownBus(String),
    #[error("load-block admittance matrix Y_LL is singular")]
    SingularAdmittance,
    #[error("no-load voltage E vanishes at {0}")]
    ZeroNoLoadVoltage(String),
    #[error("nominal voltage vanishes at {0}")]
    ZeroNominalVoltage(String),
    #[error("normalization check failed: {0}")]
    Normalization(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("nominal point residual {residual:.3e} exceeds {tol:.1e}")]
    NominalResidual { residual: f64, tol: f64 },
    #[error(transparent)]
    PowerFlow(#[from] PowerFlowError),
    #[error("solvability condition does not hold for this load scenario")]
    Unsolvable,
    #[error("bus `{bus}` has no phase {phase}")]
    MissingPhase { bus: String, phase: char },
    #[error("tolerance must lie in (0, 1), got {0}")]
    Tolerance(f64),
    #[error("unbalance metric undefined: {0}")]
    DegenerateVoltage(&'static str),
    #[error("polygon order m must be at least 2, got {0}")]
    PolygonOrder(usize),
    #[error("{metric} cannot be certified with the {method} method")]
    IncompatibleMethod { metric: String, method: String },
    #[error("{method} does not certify {metric} for any tolerance up to {eps_hi}")]
    Unbalanceable { metric: String, method: String, eps_hi: f64 },
    #[error("{method} verdict for {metric} is not monotone in the tolerance near {eps}")]
    NonMonotone { metric: String, method: String, eps: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

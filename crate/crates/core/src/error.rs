use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol '{name}' at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },
    #[error("unbound symbol '{0}'")]
    Unbound(String),
    #[error("domain error in `{subtree}` at {point}: {reason}")]
    Domain { subtree: String, point: String, reason: String },
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid chart: {0}")]
    Chart(String),
    #[error("invalid metric: {0}")]
    Metric(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("trace obstruction: lambda varies by {spread:e} across sample points (tolerance {tolerance:e})")]
    TraceObstruction { mean: f64, spread: f64, tolerance: f64 },
    #[error("critical potential: grad f vanishes at every sample point")]
    CriticalPotential,
    #[error("ODE error: {0}")]
    Ode(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

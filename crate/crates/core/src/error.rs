use thiserror::Error;

/// Errors raised by models, channels, estimators and bound evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sample outside model support: {0}")]
    Domain(String),

    #[error("parameter outside admissible set: {0}")]
    Parameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("no oracle for this model/channel combination: {0}")]
    Capability(String),

    #[error("did not converge after {iterations} iterations (last gap {gap:e})")]
    Convergence { iterations: usize, gap: f64 },

    #[error("divergence is infinite: q[{index}] = 0 but p[{index}] = {p_val} > 0")]
    DivergenceInfinite { index: usize, p_val: f64 },

    #[error("likelihood ratio unbounded at symbol {index}: f0 = {f0}, f1 = {f1}")]
    LikelihoodRatio { index: usize, f0: f64, f1: f64 },

    #[error("quadrature path leaves the parameter set at lambda = {lambda}: {detail}")]
    Path { lambda: f64, detail: String },

    #[error("protocol error at node {node}, round {round}: {detail}")]
    Protocol {
        node: usize,
        round: usize,
        detail: String,
    },

    #[error("message type error: {0}")]
    MessageType(String),

    #[error("estimator failed on trial {trial}: {detail}")]
    Estimator { trial: usize, detail: String },

    #[error("moment generating function estimate diverged at lambda = {lambda}")]
    MgfDiverged { lambda: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("t = {t} is outside the open interval ({a}, {b})")]
    Domain { t: f64, a: f64, b: f64 },

    #[error("invalid warping function: {0}")]
    InvalidWarping(String),

    #[error("field values leave the warping domain at {count} node(s), first at node {first} (u = {value})")]
    Range { count: usize, first: usize, value: f64 },

    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("metric is not positive definite at node {node} (det = {det:e})")]
    SingularMetric { node: usize, det: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("flow blew up at step {step}: {reason}")]
    BlowUp { step: usize, reason: String },

    #[error("inversion failed: {0}")]
    Inversion(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("format error: {0}")]
    Format(String),
}

use alloc::string::String;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown shape `{0}`")]
    UnknownShape(String),
    #[error("shape parameter {index}: {reason}")]
    InvalidParameter { index: usize, reason: String },
    #[error("{shape} expects {expected} parameters, got {got}")]
    ParameterCount {
        shape: &'static str,
        expected: &'static str,
        got: usize,
    },
    #[error("parameter {value} on axis {axis} lies outside the non-periodic domain")]
    OutsideDomain { axis: usize, value: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("embedding is not an immersion at node {node} (singular value ratio {ratio:e})")]
    NotImmersed { node: usize, ratio: f64 },
    #[error("no normal seed is transversal over the whole grid (best residual {residual:e})")]
    NoNormalSeed { residual: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("metric is not positive definite at node {node}")]
    DegenerateMetric { node: usize },
    #[error("operator is not symmetric in its gauge (relative residual {residual:e})")]
    NotSymmetric { residual: f64 },
    #[error("shifted operator is not positive definite")]
    NotPositiveDefinite,
    #[error("eigensolver converged {converged} of {wanted} pairs")]
    NoConvergence { converged: usize, wanted: usize },
    #[error("requested {wanted} eigenpairs from an operator of dimension {dim}")]
    TooManyEigenpairs { wanted: usize, dim: usize },
    #[error("vector length {got} does not match grid size {expected}")]
    GridMismatch { expected: usize, got: usize },
    #[error("weight vanishes or is negative at node {node}")]
    ZeroWeight { node: usize },
    #[error("offset |q| = {offset} reaches the focal radius {radius}")]
    FocalRadius { offset: f64, radius: f64 },
    #[error("tube half-width times curvature is {product}, must stay below 0.9")]
    TubeTooThick { product: f64 },
    #[error("transverse direction under-resolved: {nodes} nodes, need at least {required}")]
    Underresolved { nodes: usize, required: usize },
    #[error("too few samples: {rows} rows, need at least {required}")]
    TooFewSamples { rows: usize, required: usize },
    #[error("parameter not increasing at row {row}")]
    NotIncreasing { row: usize },
    #[error("malformed samples: {0}")]
    MalformedSamples(String),
    #[error("extrapolation refused: {0}")]
    Extrapolation(String),
}

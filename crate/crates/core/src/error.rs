use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {what} has {found} samples, expected {expected}")]
    GridMismatch {
        what: &'static str,
        found: usize,
        expected: usize,
    },

    #[error("invalid reservoir model: {0}")]
    InvalidModel(String),

    #[error("negative occupation {value} at omega = {omega}")]
    NegativeOccupation { omega: f64, value: f64 },

    #[error("quadrature did not converge: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Quadrature { residual: f64, tolerance: f64 },

    #[error("step {step} rejected: |u| = {modulus:.6} exceeds 1 + 1e-3; reduce dt or check the kernel")]
    StepRejected { step: usize, modulus: f64 },

    #[error("missing derivative data: {0}")]
    MissingDerivative(&'static str),

    #[error("invalid initial state: {0}")]
    InvalidState(String),

    #[error("truncation breach at t = {t:.4}: top Fock level holds {occupation:.3e}; increase N_max")]
    TruncationBreach { t: f64, occupation: f64 },

    #[error("density matrix became non-finite at t = {t:.4}")]
    NonFinite { t: f64 },

    #[error("master-equation coefficients are singular at node {node} (zero of u)")]
    SingularNode { node: usize },

    #[error("chain of {sites} sites is too short for t_max = {t_max}; need at least {min_sites} sites")]
    ValidityWindow {
        sites: usize,
        t_max: f64,
        min_sites: usize,
    },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

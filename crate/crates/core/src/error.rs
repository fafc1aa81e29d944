use thiserror::Error;

use crate::formation::FeasibilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("no weight given for edge ({0}, {1})")]
    MissingWeight(usize, usize),

    #[error("Laplacian entry |L[{i},{j}]| = {magnitude} outside [c_min, c_max]")]
    WeightOutOfRange { i: usize, j: usize, magnitude: f64 },

    #[error("topology is not connected")]
    Disconnected,

    #[error("edge-weight program infeasible: vertex {0} is isolated")]
    Infeasible(usize),

    #[error("resource matrix is infeasible")]
    InfeasibleResources,

    #[error("no candidate topology within budget {budget} strictly reduces task inefficacy")]
    NoImprovingCandidate { budget: usize },

    #[error("formation synthesis failed after {attempts} attempts")]
    SynthesisFailed {
        attempts: usize,
        best: Box<FeasibilityReport>,
    },

    #[error("linear program: {0}")]
    Lp(#[from] crate::lp::LpError),
}

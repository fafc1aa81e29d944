//! Resilient reconfiguration of multi-robot teams under resource failures.
//!
//! The crate covers the communication-graph side (topology, Laplacian,
//! task inefficacy, topology/weight optimization), the geometric side
//! (formation synthesis by simulated annealing) and the failure simulator
//! used to compare reconfiguration strategies.

pub mod confgen;
pub mod eigen;
pub mod error;
pub mod failsim;
pub mod formation;
pub mod geometry;
pub mod inefficacy;
pub mod laplacian;
pub mod lp;
pub mod matrix;
pub mod resources;
pub mod rng;
pub mod scalar;
pub mod topology;

pub use confgen::{
    generate_configuration, generate_with_escalation, verify_constraints, verify_misdp_constraints,
    ConfigGenResult, SearchLimits, ViolationReport,
};
pub use error::{Error, Result};
pub use failsim::{FailureEvent, FailureKind, FailureTrace, Strategy};
pub use formation::{synthesize, AnnealParams, FeasibilityReport, Formation, SynthesisOutcome};
pub use geometry::{Configuration, GeometryParams, NeighborDistanceMatrix};
pub use inefficacy::{nuclear_norm, task_inefficacy};
pub use laplacian::WeightedLaplacian;
pub use matrix::Matrix;
pub use resources::ResourceMatrix;
pub use scalar::{LpScalar, Real};
pub use topology::{Edge, Topology};

pub type Configuration64 = Configuration<f64>;
pub type Configuration32 = Configuration<f32>;
pub type Laplacian64 = WeightedLaplacian<f64>;
pub type Laplacian32 = WeightedLaplacian<f32>;
pub type Formation64 = Formation<f64>;
pub type Formation32 = Formation<f32>;
pub type GeometryParams64 = GeometryParams<f64>;
pub type GeometryParams32 = GeometryParams<f32>;
pub type AnnealParams64 = AnnealParams<f64>;
pub type AnnealParams32 = AnnealParams<f32>;
pub type ConfigGenResult64 = ConfigGenResult<f64>;
pub type FailureTrace64 = FailureTrace<f64>;

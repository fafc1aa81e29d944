//! Experiment runner for resilient multi-robot reconfiguration: scenario
//! replay, the random-edge comparison and the hindsight comparison, with
//! seeded, byte-reproducible CSV/JSON output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiments::{
    run_hindsight_comparison, run_random_edge_comparison, run_scenario, BinnedSeries,
    HindsightComparison, RandomEdgeComparison, ScenarioResult,
};
pub use output::{emit_outputs, ExperimentResults};

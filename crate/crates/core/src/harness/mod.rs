//! Scenario files, seeded ensembles, the model comparator and the scenario
//! runner behind the command-line tool.

pub mod ensemble;
pub mod run;
pub mod scenario;
pub mod tangle_runs;
pub mod validate;

pub use run::{run_scenario, RunOptions, RunSummary};
pub use scenario::Scenario;

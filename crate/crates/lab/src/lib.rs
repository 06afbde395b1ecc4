//! Scenario runner for `proxgeo-core`.
//!
//! A scenario builds a manifold and (usually) a convex set, runs a list of
//! numerical checks and returns a [`report::Report`]. Reports serialize to
//! canonical JSON and to CSV; both are byte-identical for a fixed seed
//! whatever the worker count. [`config`] reads JSON experiment files that
//! override the manifold, set, tolerances, seed and sample counts.

pub mod config;
pub mod report;
pub mod scenarios;

pub use config::{load_config, parse_config, ConfigError, ExperimentConfig};
pub use report::{Check, Report, Status};
pub use scenarios::{find, run_default, scenarios, Scenario, DEFAULT_SEED};

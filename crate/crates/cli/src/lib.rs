//! Configuration, figure recipes and artifact output for the `mcvd` tool.

pub mod config;
pub mod output;
pub mod recipes;

pub use config::{ExperimentConfig, Sweep, SweepVariable};
pub use output::{Cell, Table};
pub use recipes::{default_config, run, RunError, RECIPES};

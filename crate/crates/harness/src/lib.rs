//! Experiment runner for subgoal search: budget and k sweeps, the grid-world
//! noise table, dataset generation and Sokoban analyses, all emitting CSV.

pub mod analyze;
pub mod config;
pub mod datagen;
pub mod output;
pub mod sweep;
pub mod table4;

pub use config::{EnvKind, ExperimentConfig, Planner, ProviderSpec};
pub use sweep::{run_k_sweep, run_sweep, KSweepRow, Outcome, SweepReport, SweepRow};

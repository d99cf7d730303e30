//! Seeded, config-driven experiments on holographic MIMO channels.
//!
//! A run is a pure function of its JSON config and seed: trials draw from
//! per-trial random streams and are reduced in trial order, so outputs are
//! byte-identical for any number of worker threads.

pub mod arrays;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod scenarios;

pub use config::{EfficiencyMode, Params, ScenarioConfig, ScenarioId};
pub use error::RunError;
pub use runner::{replay, run, Manifest};

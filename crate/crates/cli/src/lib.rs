//! Batch experiment runner for `eqweyl-core`.
//!
//! An experiment is one JSON [`config::ExperimentConfig`]. [`experiment::run`]
//! evaluates it over an `h` schedule and produces a report CSV, a JSON
//! summary and a gnuplot-ready error table, all stamped with the config hash.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod experiment;

pub use config::ExperimentConfig;
pub use experiment::{run, RunOutput};

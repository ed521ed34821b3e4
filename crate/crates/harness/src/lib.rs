//! Experiment harness around `gzk_core`: TOML run configs, the `simulate`,
//! `radius-track`, `probe` and `sweep` commands, and run manifests.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use config::{parse_config, RunConfig};
pub use error::{LabError, Result};

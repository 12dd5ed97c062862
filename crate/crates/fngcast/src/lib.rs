//! File formats, HTTP, persistence and the command line around `fngcast-core`.
//!
//! The pipeline runs `ingest` (parse, align, attach indicators), `tune`
//! (grid search per family), `train`, `simulate` (backtest against Buy & Hold)
//! and `report`, each writing under one output directory.

pub mod artifacts;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod fng;
pub mod ohlcv;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod store;
pub mod synthetic;

pub use error::{Error, Result};

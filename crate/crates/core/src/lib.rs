//! Pure computation for sentiment-augmented next-day price forecasting.
//!
//! The crate is `no_std` (it needs `alloc`) and covers everything between raw
//! observations and a backtest: date alignment and summary statistics, the
//! technical indicators, lagged min-max features, six regressors, expanding
//! window grid search and the all-in/all-out trading simulation.
//!
//! File formats, HTTP and the command line live in the `fngcast` crate.
#![no_std]

extern crate alloc;

pub mod backtest;
pub mod error;
pub mod featurizer;
pub mod indicators;
pub mod linalg;
pub mod market;
pub mod models;
pub mod rng;
pub mod tuner;

pub use chrono::NaiveDate;
pub use error::{Error, Result};
pub use linalg::Matrix;

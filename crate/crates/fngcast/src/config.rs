//! Run configuration: flat JSON keys, overridden by command-line flags.

use std::path::{Path, PathBuf};

use fngcast_core::backtest::StrategyConfig;
use fngcast_core::models::Family;
use fngcast_core::tuner::DEFAULT_SPLITS;
use fngcast_core::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fng::{DEFAULT_FNG_URL, FNG_URL_ENV};
use crate::store;

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid default date")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub ohlcv: Option<PathBuf>,
    pub fng: Option<PathBuf>,
    pub fng_url: String,
    /// Entries to request from the index API; 0 is the full history.
    pub fng_limit: usize,
    pub out: PathBuf,
    pub train_start: NaiveDate,
    pub train_end: NaiveDate,
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
    pub families: Vec<Family>,
    pub seed: u64,
    pub n_splits: usize,
    pub initial_capital: f64,
    pub fees: f64,
    /// Worker threads for tuning; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ohlcv: None,
            fng: None,
            fng_url: DEFAULT_FNG_URL.into(),
            fng_limit: 0,
            out: PathBuf::from("out"),
            train_start: date(2018, 2, 1),
            train_end: date(2022, 5, 31),
            test_start: date(2022, 6, 1),
            test_end: date(2022, 12, 31),
            families: Family::ALL.to_vec(),
            seed: 0,
            n_splits: DEFAULT_SPLITS,
            initial_capital: 200_000.0,
            fees: 0.0,
            threads: 0,
        }
    }
}

/// Every key optional; used for both the config file and the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub ohlcv: Option<PathBuf>,
    pub fng: Option<PathBuf>,
    pub fng_url: Option<String>,
    pub fng_limit: Option<usize>,
    pub out: Option<PathBuf>,
    pub train_start: Option<NaiveDate>,
    pub train_end: Option<NaiveDate>,
    pub test_start: Option<NaiveDate>,
    pub test_end: Option<NaiveDate>,
    pub families: Option<Vec<Family>>,
    pub seed: Option<u64>,
    pub n_splits: Option<usize>,
    pub initial_capital: Option<f64>,
    pub fees: Option<f64>,
    pub threads: Option<usize>,
}

impl PartialConfig {
    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_str(&store::read_text(path)?)
            .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))
    }
}

macro_rules! layer {
    ($base:ident, $over:expr, $($key:ident),*) => {
        $(if let Some(v) = $over.$key.clone() { $base.$key = v; })*
    };
}

impl RunConfig {
    /// Flags beat the file, the file beats defaults. The endpoint also honours
    /// the environment, below the flag and above the file.
    pub fn resolve(file: &PartialConfig, cli: &PartialConfig, env_url: Option<String>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for layer in [file, cli] {
            if let Some(v) = layer.ohlcv.clone() {
                cfg.ohlcv = Some(v);
            }
            if let Some(v) = layer.fng.clone() {
                cfg.fng = Some(v);
            }
            layer!(
                cfg, layer, fng_url, fng_limit, out, train_start, train_end, test_start, test_end, families, seed,
                n_splits, initial_capital, fees, threads
            );
        }
        if cli.fng_url.is_none() {
            if let Some(url) = env_url.filter(|u| !u.is_empty()) {
                cfg.fng_url = url;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Resolve with the process environment.
    pub fn from_sources(file: Option<&Path>, cli: &PartialConfig) -> Result<Self> {
        let file = match file {
            Some(p) => PartialConfig::load(p)?,
            None => PartialConfig::default(),
        };
        Self::resolve(&file, cli, std::env::var(FNG_URL_ENV).ok())
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_start > self.train_end {
            return Err(Error::Config(format!(
                "train_start {} is after train_end {}",
                self.train_start, self.train_end
            )));
        }
        if self.train_end >= self.test_start {
            return Err(Error::Config(format!(
                "train_end {} must precede test_start {}",
                self.train_end, self.test_start
            )));
        }
        if self.test_start > self.test_end {
            return Err(Error::Config(format!(
                "test_start {} is after test_end {}",
                self.test_start, self.test_end
            )));
        }
        if self.families.is_empty() {
            return Err(Error::Config("no model families selected".into()));
        }
        if self.n_splits == 0 {
            return Err(Error::Config("n_splits must be >= 1".into()));
        }
        self.strategy().validate()?;
        Ok(())
    }

    pub fn strategy(&self) -> StrategyConfig {
        StrategyConfig {
            initial_capital: self.initial_capital,
            fees: self.fees,
        }
    }
}

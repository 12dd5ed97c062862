//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fngcast_core::models::Family;
use fngcast_core::NaiveDate;

use crate::config::PartialConfig;

fn parse_family(s: &str) -> Result<Family, String> {
    Family::parse(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "fngcast", version, about = "Next-day price forecasting from technical indicators and market sentiment")]
pub struct Cli {
    /// Flat JSON run configuration; flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Root seed for every random choice in the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, align and summarize the price and sentiment sources.
    Ingest(IngestArgs),
    /// Grid search each family with expanding-window cross-validation.
    Tune(TuneArgs),
    /// Fit the selected specs on the training window and save them.
    Train(TrainArgs),
    /// Backtest the selected specs over the test window.
    Simulate(SimulateArgs),
    /// Render a Markdown summary of the output directory.
    Report,
}

#[derive(Debug, Default, Args)]
pub struct WindowArgs {
    #[arg(long)]
    pub train_start: Option<NaiveDate>,
    #[arg(long)]
    pub train_end: Option<NaiveDate>,
    #[arg(long)]
    pub test_start: Option<NaiveDate>,
    #[arg(long)]
    pub test_end: Option<NaiveDate>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// OHLCV CSV export.
    #[arg(long, value_name = "FILE")]
    pub ohlcv: Option<PathBuf>,
    /// Fear & Greed JSON document.
    #[arg(long, value_name = "FILE")]
    pub fng: Option<PathBuf>,
    /// Download the Fear & Greed history instead of reading a file.
    #[arg(long)]
    pub fetch_fng: bool,
    #[arg(long, value_name = "URL")]
    pub fng_url: Option<String>,
    #[arg(long)]
    pub fng_limit: Option<usize>,
    /// Generate this many days of seeded synthetic data instead of reading files.
    #[arg(long, value_name = "DAYS", conflicts_with_all = ["ohlcv", "fng", "fetch_fng"])]
    pub synthetic: Option<usize>,
    /// First day of the synthetic series.
    #[arg(long, requires = "synthetic")]
    pub synthetic_start: Option<NaiveDate>,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Comma-separated families; all six by default.
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    pub families: Option<Vec<Family>>,
    #[arg(long)]
    pub splits: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    pub families: Option<Vec<Family>>,
    /// JSON list of model specs to use instead of the tuned ones.
    #[arg(long, value_name = "FILE")]
    pub specs: Option<PathBuf>,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    pub families: Option<Vec<Family>>,
    #[arg(long, value_name = "FILE")]
    pub specs: Option<PathBuf>,
    #[arg(long)]
    pub capital: Option<f64>,
    #[arg(long)]
    pub fees: Option<f64>,
    #[command(flatten)]
    pub window: WindowArgs,
}

impl Cli {
    /// The configuration keys set on the command line.
    pub fn partial(&self) -> PartialConfig {
        let mut p = PartialConfig {
            seed: self.seed,
            out: self.out.clone(),
            ..Default::default()
        };
        let window = |p: &mut PartialConfig, w: &WindowArgs| {
            p.train_start = w.train_start;
            p.train_end = w.train_end;
            p.test_start = w.test_start;
            p.test_end = w.test_end;
        };
        match &self.command {
            Command::Ingest(a) => {
                p.ohlcv = a.ohlcv.clone();
                p.fng = a.fng.clone();
                p.fng_url = a.fng_url.clone();
                p.fng_limit = a.fng_limit;
            }
            Command::Tune(a) => {
                p.families = a.families.clone();
                p.n_splits = a.splits;
                p.threads = a.threads;
                window(&mut p, &a.window);
            }
            Command::Train(a) => {
                p.families = a.families.clone();
                window(&mut p, &a.window);
            }
            Command::Simulate(a) => {
                p.families = a.families.clone();
                p.initial_capital = a.capital;
                p.fees = a.fees;
                window(&mut p, &a.window);
            }
            Command::Report => {}
        }
        p
    }
}

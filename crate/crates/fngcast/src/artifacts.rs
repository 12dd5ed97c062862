//! Where each command writes, and the documents it writes there.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fngcast_core::backtest::{ComparisonRow, SimulationFailure, SimulationSummary};
use fngcast_core::models::{Family, ModelSpec};
use fngcast_core::NaiveDate;
use serde::{Deserialize, Serialize};

/// Output directory layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    fn at(&self, parts: &[&str]) -> PathBuf {
        parts.iter().fold(self.root.clone(), |p, s| p.join(s))
    }

    pub fn dataset(&self) -> PathBuf {
        self.at(&["dataset.csv"])
    }

    pub fn summary(&self) -> PathBuf {
        self.at(&["summary.json"])
    }

    pub fn raw_ohlcv(&self) -> PathBuf {
        self.at(&["raw", "ohlcv.csv"])
    }

    pub fn raw_fng(&self) -> PathBuf {
        self.at(&["raw", "fng.json"])
    }

    pub fn tune_json(&self, family: Family) -> PathBuf {
        self.at(&["tune", &format!("{}.json", family.name())])
    }

    pub fn tune_csv(&self, family: Family) -> PathBuf {
        self.at(&["tune", &format!("{}.csv", family.name())])
    }

    pub fn best_json(&self) -> PathBuf {
        self.at(&["tune", "best_params.json"])
    }

    pub fn best_csv(&self) -> PathBuf {
        self.at(&["tune", "best_params.csv"])
    }

    pub fn model(&self, label: &str) -> PathBuf {
        self.at(&["models", &format!("{label}.json")])
    }

    pub fn simulation(&self) -> PathBuf {
        self.at(&["simulation", "report.json"])
    }

    pub fn ledger(&self, label: &str) -> PathBuf {
        self.at(&["simulation", &format!("ledger_{label}.csv")])
    }

    pub fn equity(&self) -> PathBuf {
        self.at(&["simulation", "equity.csv"])
    }

    pub fn equity_plot(&self) -> PathBuf {
        self.at(&["plots", "equity.svg"])
    }

    pub fn predictions_plot(&self) -> PathBuf {
        self.at(&["plots", "predictions.svg"])
    }

    pub fn report(&self) -> PathBuf {
        self.at(&["report.md"])
    }

    /// Timing and version information; the only files with timestamps.
    pub fn meta(&self, command: &str) -> PathBuf {
        self.at(&["meta", &format!("{command}.json")])
    }

    pub fn exists(&self) -> bool {
        Path::new(&self.root).is_dir()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    pub seed: u64,
    /// Fit wall time per model label; kept here so model files stay reproducible.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fit_seconds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub model: String,
    pub spec: ModelSpec,
    pub hits: usize,
    pub denominator: usize,
    pub final_value: f64,
}

/// The simulation report: one row per model plus Buy & Hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDoc {
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
    pub initial_capital: f64,
    pub fees: f64,
    pub buy_hold_final: f64,
    /// Sorted by final value, descending; includes the `buy_hold` row.
    pub table: Vec<ComparisonRow>,
    pub models: Vec<ModelOutcome>,
    pub failures: Vec<SimulationFailure>,
}

impl SimulationDoc {
    pub fn new(
        summary: &SimulationSummary,
        specs: &[(String, ModelSpec)],
        window: (NaiveDate, NaiveDate),
        initial_capital: f64,
        fees: f64,
    ) -> Self {
        let models = summary
            .reports
            .iter()
            .map(|r| ModelOutcome {
                model: r.model.clone(),
                spec: specs
                    .iter()
                    .find(|(n, _)| *n == r.model)
                    .map(|(_, s)| s.clone())
                    .expect("every report comes from a listed spec"),
                hits: r.hits,
                denominator: r.denominator,
                final_value: r.final_value,
            })
            .collect();
        Self {
            test_start: window.0,
            test_end: window.1,
            initial_capital,
            fees,
            buy_hold_final: summary.buy_hold_final,
            table: summary.table(),
            models,
            failures: summary.failures.clone(),
        }
    }
}

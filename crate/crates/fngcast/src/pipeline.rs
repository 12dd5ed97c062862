//! The end-to-end steps behind the commands, free of argument parsing.

use std::ops::Range;
use std::time::Instant;

use fngcast_core::backtest::{simulate_all, PricePoint, SimulationSummary, StrategyConfig};
use fngcast_core::featurizer::{build_samples, fit_normalizer, transform, FeatureMatrix, FeatureSpec, Normalizer};
use fngcast_core::indicators::attach_indicators;
use fngcast_core::market::{align, summarize, AlignedDataset, Bar, SentimentPoint, SummaryStats};
use fngcast_core::models::{fit, Family, ModelSpec, Predictor, TrainedModel};
use fngcast_core::tuner::{evaluate_candidate, fold_seed, make_cv_plan, GridDefinition, TuneResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::store::BestRow;

/// Columns reported in the data summary.
pub const SUMMARY_COLUMNS: [&str; 6] = ["open", "high", "low", "close", "volume", "fng"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub rows: usize,
    pub first_date: fngcast_core::NaiveDate,
    pub last_date: fngcast_core::NaiveDate,
    pub dropped_bars: usize,
    pub dropped_sentiment: usize,
    pub skipped_null_rows: usize,
    pub stats: SummaryStats,
}

/// Align the two sources, attach indicators and summarize.
pub fn ingest(
    bars: &[Bar],
    sentiment: &[SentimentPoint],
    skipped_null_rows: usize,
    spec: &FeatureSpec,
) -> Result<(AlignedDataset, IngestSummary)> {
    let a = align(bars, sentiment)?;
    let stats = summarize(&a.dataset, &SUMMARY_COLUMNS)?;
    let dataset = attach_indicators(a.dataset, &spec.indicators)?;
    let dates: Vec<_> = dataset.dates().collect();
    let summary = IngestSummary {
        rows: dataset.len(),
        first_date: dates[0],
        last_date: dates[dates.len() - 1],
        dropped_bars: a.dropped_bars,
        dropped_sentiment: a.dropped_sentiment,
        skipped_null_rows,
        stats,
    };
    Ok((dataset, summary))
}

/// Samples split by target date, with the scaling fit on training rows.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub raw: FeatureMatrix,
    pub train_rows: Range<usize>,
    pub test_rows: Range<usize>,
    pub normalizer: Normalizer,
    /// Closes dated inside the test window.
    pub prices: Vec<PricePoint>,
}

impl Prepared {
    pub fn train_raw(&self) -> FeatureMatrix {
        self.raw.slice(self.train_rows.clone())
    }

    pub fn train_normalized(&self) -> Result<FeatureMatrix> {
        Ok(transform(&self.train_raw(), &self.normalizer)?)
    }

    pub fn test_normalized(&self) -> Result<FeatureMatrix> {
        Ok(transform(&self.raw.slice(self.test_rows.clone()), &self.normalizer)?)
    }
}

pub fn prepare(dataset: &AlignedDataset, spec: &FeatureSpec, cfg: &RunConfig) -> Result<Prepared> {
    let dates: Vec<_> = dataset.dates().collect();
    let (first, last) = (dates[0], dates[dates.len() - 1]);
    if cfg.train_start < first || cfg.test_end > last {
        return Err(Error::Config(format!(
            "windows {}..{} and {}..{} must lie within the dataset span {first}..{last}",
            cfg.train_start, cfg.train_end, cfg.test_start, cfg.test_end
        )));
    }
    let raw = build_samples(dataset, spec)?;
    let train_rows = raw.rows_between(cfg.train_start, cfg.train_end);
    let test_rows = raw.rows_between(cfg.test_start, cfg.test_end);
    if train_rows.len() < cfg.n_splits + 1 {
        return Err(Error::Config(format!(
            "training window holds {} samples, need at least {}",
            train_rows.len(),
            cfg.n_splits + 1
        )));
    }
    let window = dataset.rows_between(cfg.test_start, cfg.test_end);
    let prices: Vec<PricePoint> = dataset.bars()[window]
        .iter()
        .map(|b| PricePoint {
            date: b.date,
            close: b.close,
        })
        .collect();
    if prices.len() < 2 {
        return Err(Error::Config(format!(
            "test window {}..{} holds {} trading day(s), need at least 2",
            cfg.test_start,
            cfg.test_end,
            prices.len()
        )));
    }
    let normalizer = fit_normalizer(&raw, train_rows.clone())?;
    Ok(Prepared {
        raw,
        train_rows,
        test_rows,
        normalizer,
        prices,
    })
}

/// The candidates searched for `family`, seeded for the final refit.
pub fn candidates(family: Family, cfg: &RunConfig) -> Vec<ModelSpec> {
    GridDefinition::standard(family).expand(fold_seed(cfg.seed, family, cfg.n_splits))
}

/// Grid search over the training samples, one candidate per task.
pub fn tune_family(prep: &Prepared, family: Family, cfg: &RunConfig) -> Result<TuneResult> {
    let raw = prep.train_raw();
    let plan = make_cv_plan(raw.len(), cfg.n_splits)?;
    let specs = candidates(family, cfg);
    let outcomes: Vec<_> = specs
        .par_iter()
        .map(|c| evaluate_candidate(c, &raw, &plan, cfg.seed))
        .collect();
    Ok(TuneResult::from_scores(family, &specs, outcomes)?)
}

/// Best entry per label (SVR split by kernel), in family order.
pub fn best_rows(results: &[TuneResult]) -> Vec<BestRow> {
    results
        .iter()
        .flat_map(|r| {
            r.best_per_label().into_iter().map(|e| BestRow {
                label: e.spec.label(),
                spec: e.spec.clone(),
                mean_mse: e.mean_mse,
                fold_mse: e.fold_mse.clone(),
            })
        })
        .collect()
}

/// Fit on the whole training window; records wall time.
pub fn train_spec(prep: &Prepared, spec: &ModelSpec) -> Result<TrainedModel> {
    let train = prep.train_normalized()?;
    let started = Instant::now();
    let mut model = fit(spec, &train.x, &train.y)?;
    model.meta.wall_time_secs = Some(started.elapsed().as_secs_f64());
    Ok(model)
}

pub fn train_all(prep: &Prepared, rows: &[BestRow]) -> Vec<(String, Result<TrainedModel>)> {
    rows.par_iter()
        .map(|r| (r.label.clone(), train_spec(prep, &r.spec)))
        .collect()
}

pub fn simulate(prep: &Prepared, models: &[(String, TrainedModel)], strategy: &StrategyConfig) -> Result<SimulationSummary> {
    let test = prep.test_normalized()?;
    let refs: Vec<(String, &dyn Predictor)> = models.iter().map(|(n, m)| (n.clone(), m as &dyn Predictor)).collect();
    Ok(simulate_all(&refs, &test, &prep.normalizer, &prep.prices, strategy)?)
}

//! All-in/all-out trading on predicted next-day changes, plus Buy & Hold.
//!
//! On decision day `t` the strategy compares the predicted close of `t + 1`
//! with the close of `t`: a nonnegative predicted change means hold the asset
//! (buying with all cash if flat), a negative one means hold cash (selling
//! everything if long). Trades fill at the close of `t`. The last day only
//! marks the open position to market.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurizer::{FeatureMatrix, Normalizer};
use crate::models::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub initial_capital: f64,
    /// Fraction of traded notional lost on every buy and every sell.
    pub fees: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            initial_capital: 200_000.0,
            fees: 0.0,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_capital > 0.0) || !self.initial_capital.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "initial capital must be positive, got {}",
                self.initial_capital
            )));
        }
        if !(0.0..1.0).contains(&self.fees) {
            return Err(Error::InvalidConfig(format!("fees must lie in [0, 1), got {}", self.fees)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub close: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Long,
    Flat,
}

impl Signal {
    /// Long when the predicted change is nonnegative.
    pub fn from_change(predicted_change: f64) -> Self {
        if predicted_change >= 0.0 {
            Signal::Long
        } else {
            Signal::Flat
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub date: NaiveDate,
    pub close: f64,
    /// Predicted close of the next day, when a prediction drove this row.
    pub predicted_next_close: Option<f64>,
    /// `None` on the final mark-to-market row.
    pub signal: Option<Signal>,
    /// Units of the asset held after this row's trade.
    pub position: f64,
    pub cash: f64,
    pub equity: f64,
    pub hit: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestLedger {
    pub rows: Vec<LedgerRow>,
    pub entries: usize,
    pub exits: usize,
}

impl BacktestLedger {
    pub fn final_value(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.equity)
    }

    pub fn equity_curve(&self) -> Vec<(NaiveDate, f64)> {
        self.rows.iter().map(|r| (r.date, r.equity)).collect()
    }
}

fn check_prices(prices: &[PricePoint]) -> Result<()> {
    if prices.is_empty() {
        return Err(Error::TooShort {
            what: "price series",
            required: 1,
            actual: 0,
        });
    }
    for w in prices.windows(2) {
        if w[1].date <= w[0].date {
            return Err(Error::UnsortedDates(w[1].date));
        }
    }
    if let Some(p) = prices.iter().find(|p| !(p.close > 0.0) || !p.close.is_finite()) {
        return Err(Error::InvalidBar {
            date: p.date,
            reason: format!("close must be positive, got {}", p.close),
        });
    }
    Ok(())
}

/// Trade `signals[t]` at the close of `prices[t]`; one signal per day but the last.
pub fn run_signals(prices: &[PricePoint], signals: &[Signal], config: &StrategyConfig) -> Result<BacktestLedger> {
    config.validate()?;
    check_prices(prices)?;
    if signals.len() + 1 != prices.len() {
        return Err(Error::LengthMismatch(format!(
            "{} signals for {} prices (need one fewer)",
            signals.len(),
            prices.len()
        )));
    }
    let keep = 1.0 - config.fees;
    let mut cash = config.initial_capital;
    let mut position = 0.0;
    let (mut entries, mut exits) = (0, 0);
    let mut rows = Vec::with_capacity(prices.len());
    for (t, p) in prices.iter().enumerate() {
        let signal = signals.get(t).copied();
        match signal {
            Some(Signal::Long) if position == 0.0 && cash > 0.0 => {
                position = cash * keep / p.close;
                cash = 0.0;
                entries += 1;
            }
            Some(Signal::Flat) if position > 0.0 => {
                cash = position * p.close * keep;
                position = 0.0;
                exits += 1;
            }
            _ => {}
        }
        rows.push(LedgerRow {
            date: p.date,
            close: p.close,
            predicted_next_close: None,
            signal,
            position,
            cash,
            equity: cash + position * p.close,
            hit: None,
        });
    }
    Ok(BacktestLedger { rows, entries, exits })
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Whether the predicted direction of `t -> t + 1` matches the realized one.
pub fn is_hit(close_today: f64, close_next: f64, predicted_next: f64) -> bool {
    sign(predicted_next - close_today) == sign(close_next - close_today)
}

fn check_predictions(prices: &[PricePoint], predictions: &[f64]) -> Result<()> {
    check_prices(prices)?;
    if predictions.len() + 1 != prices.len() {
        return Err(Error::LengthMismatch(format!(
            "{} predictions for {} prices (need one fewer)",
            predictions.len(),
            prices.len()
        )));
    }
    Ok(())
}

/// `(hits, evaluable days)`; `predictions[t]` is the predicted close of day `t + 1`.
pub fn count_hits(prices: &[PricePoint], predictions: &[f64]) -> Result<(usize, usize)> {
    check_predictions(prices, predictions)?;
    let hits = predictions
        .iter()
        .enumerate()
        .filter(|&(t, &pred)| is_hit(prices[t].close, prices[t + 1].close, pred))
        .count();
    Ok((hits, predictions.len()))
}

/// `predictions[t]` is the predicted close (USD) of `prices[t + 1]`.
pub fn run_strategy(prices: &[PricePoint], predictions: &[f64], config: &StrategyConfig) -> Result<BacktestLedger> {
    check_predictions(prices, predictions)?;
    let signals: Vec<Signal> = predictions
        .iter()
        .zip(prices)
        .map(|(pred, p)| Signal::from_change(pred - p.close))
        .collect();
    let mut ledger = run_signals(prices, &signals, config)?;
    for (t, pred) in predictions.iter().enumerate() {
        let row = &mut ledger.rows[t];
        row.predicted_next_close = Some(*pred);
        row.hit = Some(is_hit(prices[t].close, prices[t + 1].close, *pred));
    }
    Ok(ledger)
}

/// Buy at the first close, hold to the last.
pub fn run_buy_hold(prices: &[PricePoint], config: &StrategyConfig) -> Result<f64> {
    config.validate()?;
    check_prices(prices)?;
    let first = prices[0].close;
    let last = prices[prices.len() - 1].close;
    Ok(config.initial_capital * (1.0 - config.fees) * (last / first))
}

/// Day-by-day account of Buy & Hold, for equity curves.
pub fn buy_hold_ledger(prices: &[PricePoint], config: &StrategyConfig) -> Result<BacktestLedger> {
    check_prices(prices)?;
    let signals = alloc::vec![Signal::Long; prices.len() - 1];
    if signals.is_empty() {
        // A single day: buy and mark in one row.
        let keep = 1.0 - config.fees;
        config.validate()?;
        let p = prices[0];
        let position = config.initial_capital * keep / p.close;
        return Ok(BacktestLedger {
            rows: alloc::vec![LedgerRow {
                date: p.date,
                close: p.close,
                predicted_next_close: None,
                signal: None,
                position,
                cash: 0.0,
                equity: position * p.close,
                hit: None,
            }],
            entries: 1,
            exits: 0,
        });
    }
    run_signals(prices, &signals, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub model: String,
    pub hits: usize,
    pub denominator: usize,
    pub final_value: f64,
    pub buy_hold_final: f64,
    pub ledger: BacktestLedger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    /// `None` for the Buy & Hold row.
    pub hits: Option<usize>,
    pub final_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationFailure {
    pub model: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub reports: Vec<SimulationReport>,
    pub failures: Vec<SimulationFailure>,
    pub buy_hold_final: f64,
    pub buy_hold: BacktestLedger,
}

pub const BUY_HOLD_LABEL: &str = "buy_hold";

impl SimulationSummary {
    /// Models and the Buy & Hold row, by final value descending.
    pub fn table(&self) -> Vec<ComparisonRow> {
        let mut rows: Vec<ComparisonRow> = self
            .reports
            .iter()
            .map(|r| ComparisonRow {
                model: r.model.clone(),
                hits: Some(r.hits),
                final_value: r.final_value,
            })
            .collect();
        rows.push(ComparisonRow {
            model: BUY_HOLD_LABEL.into(),
            hits: None,
            final_value: self.buy_hold_final,
        });
        rows.sort_by(|a, b| b.final_value.total_cmp(&a.final_value));
        rows
    }
}

/// USD predictions of the close of `prices[t + 1]` for every decision day `t`.
///
/// `test` holds normalized samples keyed by target date.
pub fn predict_closes(
    model: &dyn Predictor,
    test: &FeatureMatrix,
    normalizer: &Normalizer,
    prices: &[PricePoint],
) -> Result<Vec<f64>> {
    let mut rows = Vec::with_capacity(prices.len().saturating_sub(1));
    for p in prices.iter().skip(1) {
        rows.push(test.position_of(p.date).ok_or(Error::MissingPrediction(p.date))?);
    }
    let x = test.x.select_rows(&rows);
    let pred = model.predict(&x)?;
    Ok(pred.into_iter().map(|v| normalizer.inverse_transform_target(v)).collect())
}

/// Simulate every model over `prices`; a failing model is reported, not fatal.
pub fn simulate_all(
    models: &[(String, &dyn Predictor)],
    test: &FeatureMatrix,
    normalizer: &Normalizer,
    prices: &[PricePoint],
    config: &StrategyConfig,
) -> Result<SimulationSummary> {
    // Taken from the ledger so the table and the equity curve agree to the bit.
    let buy_hold = buy_hold_ledger(prices, config)?;
    let buy_hold_final = buy_hold.final_value();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (name, model) in models {
        let outcome = predict_closes(*model, test, normalizer, prices).and_then(|pred| {
            let ledger = run_strategy(prices, &pred, config)?;
            let (hits, denominator) = count_hits(prices, &pred)?;
            Ok(SimulationReport {
                model: name.clone(),
                hits,
                denominator,
                final_value: ledger.final_value(),
                buy_hold_final,
                ledger,
            })
        });
        match outcome {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(SimulationFailure {
                model: name.clone(),
                error: e.to_string(),
            }),
        }
    }
    Ok(SimulationSummary {
        reports,
        failures,
        buy_hold_final,
        buy_hold,
    })
}

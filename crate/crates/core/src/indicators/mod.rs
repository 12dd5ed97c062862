//! Technical indicators.
//!
//! Each indicator has a batch function and an incremental state type. Missing
//! values (the warmup prefix) are `None`.
//!
//! Column order produced by [`IndicatorConfig::column_names`]:
//! `ma_<p>` for each MA period, `macd_line`, `macd_signal`, `macd_hist`,
//! `rsi_<p>` for each RSI period, `mfi_<p>`, `obv`, `bb_upper`, `bb_mid`,
//! `bb_lower`.

mod bollinger;
mod ema;
mod macd;
mod mfi;
mod obv;
mod rsi;
mod sma;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use bollinger::{bollinger, Bollinger, BollingerSeries};
pub use ema::{ema, ema_of_series, Ema};
pub use macd::{macd, Macd, MacdSeries};
pub use mfi::{mfi, Mfi};
pub use obv::{obv, Obv};
pub use rsi::{rsi, Rsi};
pub use sma::{sma, Sma};

use crate::error::{Error, Result};
use crate::market::{AlignedDataset, Bar, Column};

/// A time-aligned series with a missing warmup prefix.
pub type Series = Vec<Option<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacdParams {
    pub fast: usize,
    pub slow: usize,
    pub signal: usize,
}

impl Default for MacdParams {
    fn default() -> Self {
        Self {
            fast: 12,
            slow: 26,
            signal: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorConfig {
    pub ma_periods: Vec<usize>,
    pub macd: MacdParams,
    pub rsi_periods: Vec<usize>,
    pub mfi_period: usize,
    pub bollinger_period: usize,
    pub bollinger_width: f64,
}

impl Default for IndicatorConfig {
    fn default() -> Self {
        Self {
            ma_periods: alloc::vec![10, 20, 30],
            macd: MacdParams::default(),
            rsi_periods: alloc::vec![6, 12, 24],
            mfi_period: 14,
            bollinger_period: 20,
            bollinger_width: 2.0,
        }
    }
}

impl IndicatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self
            .ma_periods
            .iter()
            .chain(&self.rsi_periods)
            .chain([&self.mfi_period])
            .any(|p| *p == 0)
        {
            return Err(Error::InvalidConfig("indicator periods must be >= 1".into()));
        }
        if self.bollinger_period < 2 {
            return Err(Error::InvalidConfig("bollinger period must be >= 2".into()));
        }
        self.macd.validate()
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.ma_periods.iter().map(|p| format!("ma_{p}")).collect();
        names.extend(["macd_line", "macd_signal", "macd_hist"].map(String::from));
        names.extend(self.rsi_periods.iter().map(|p| format!("rsi_{p}")));
        names.push(format!("mfi_{}", self.mfi_period));
        names.extend(["obv", "bb_upper", "bb_mid", "bb_lower"].map(String::from));
        names
    }

    /// Missing-prefix length of each column, in column order.
    pub fn column_warmups(&self) -> Vec<usize> {
        let macd_signal = self.macd.slow - 1 + self.macd.signal - 1;
        let mut w: Vec<usize> = self.ma_periods.iter().map(|p| p - 1).collect();
        w.extend([self.macd.slow - 1, macd_signal, macd_signal]);
        w.extend(self.rsi_periods.iter().copied());
        w.push(self.mfi_period);
        w.push(0);
        w.extend([self.bollinger_period - 1; 3]);
        w
    }

    /// First row index on which every indicator is defined.
    pub fn warmup(&self) -> usize {
        self.column_warmups().into_iter().max().unwrap_or(0)
    }
}

/// Compute every configured indicator over `bars`, in column order.
pub fn compute_indicators(bars: &[Bar], config: &IndicatorConfig) -> Result<Vec<Column>> {
    config.validate()?;
    let close: Vec<f64> = bars.iter().map(|b| b.close).collect();
    let volume: Vec<f64> = bars.iter().map(|b| b.volume).collect();
    let mut series: Vec<Series> = Vec::new();
    for &p in &config.ma_periods {
        series.push(sma(&close, p)?);
    }
    let m = macd(&close, config.macd)?;
    series.extend([m.line, m.signal, m.histogram]);
    for &p in &config.rsi_periods {
        series.push(rsi(&close, p)?);
    }
    series.push(mfi(bars, config.mfi_period)?);
    series.push(obv(&close, &volume)?.into_iter().map(Some).collect());
    let bb = bollinger(&close, config.bollinger_period, config.bollinger_width)?;
    series.extend([bb.upper, bb.mid, bb.lower]);

    Ok(config
        .column_names()
        .into_iter()
        .zip(series)
        .map(|(name, values)| Column::new(name, values))
        .collect())
}

/// Append (or replace) the indicator columns of `dataset`.
pub fn attach_indicators(dataset: AlignedDataset, config: &IndicatorConfig) -> Result<AlignedDataset> {
    config.validate()?;
    let required = config.warmup() + 1;
    if dataset.len() < required {
        return Err(Error::TooShort {
            what: "indicator warmup",
            required,
            actual: dataset.len(),
        });
    }
    let columns = compute_indicators(dataset.bars(), config)?;
    dataset.with_indicators(columns)
}

/// Every indicator of a config, advanced one bar at a time.
#[derive(Debug, Clone)]
pub struct IndicatorEngine {
    ma: Vec<Sma>,
    macd: Macd,
    rsi: Vec<Rsi>,
    mfi: Mfi,
    obv: Obv,
    bb: Bollinger,
}

impl IndicatorEngine {
    pub fn new(config: &IndicatorConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            ma: config.ma_periods.iter().map(|&p| Sma::new(p)).collect::<Result<_>>()?,
            macd: Macd::new(config.macd)?,
            rsi: config.rsi_periods.iter().map(|&p| Rsi::new(p)).collect::<Result<_>>()?,
            mfi: Mfi::new(config.mfi_period)?,
            obv: Obv::default(),
            bb: Bollinger::new(config.bollinger_period, config.bollinger_width)?,
        })
    }

    /// Values for the new bar, in column order.
    pub fn update(&mut self, bar: &Bar) -> Vec<Option<f64>> {
        let mut row: Vec<Option<f64>> = self.ma.iter_mut().map(|s| s.update(bar.close)).collect();
        let (l, s, h) = self.macd.update(bar.close);
        row.extend([l, s, h]);
        row.extend(self.rsi.iter_mut().map(|r| r.update(bar.close)));
        row.push(self.mfi.update(bar));
        row.push(Some(self.obv.update(bar.close, bar.volume)));
        let band = self.bb.update(bar.close);
        row.extend([band.map(|b| b.0), band.map(|b| b.1), band.map(|b| b.2)]);
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn flat_dataset(n: usize, price: f64) -> AlignedDataset {
        let d0 = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
        let bars = (0..n)
            .map(|i| Bar::new(d0 + chrono::Days::new(i as u64), price, price, price, price, 5.0).unwrap())
            .collect();
        AlignedDataset::new(bars, alloc::vec![40; n]).unwrap()
    }

    #[test]
    fn default_layout() {
        let cfg = IndicatorConfig::default();
        assert_eq!(cfg.column_names().len(), 14);
        assert_eq!(cfg.column_warmups().len(), 14);
        assert_eq!(cfg.warmup(), 33);
    }

    #[test]
    fn attach_appends_fourteen_columns() {
        let ds = attach_indicators(flat_dataset(100, 10.0), &IndicatorConfig::default()).unwrap();
        assert_eq!(ds.indicators().len(), 14);
        assert_eq!(ds.column_names().len(), 20);
        assert_eq!(ds.warmup(), 33);
        let warmups: Vec<_> = ds.indicators().iter().map(|c| c.warmup().unwrap()).collect();
        assert_eq!(warmups, IndicatorConfig::default().column_warmups());
    }

    #[test]
    fn short_dataset_is_rejected() {
        let err = attach_indicators(flat_dataset(10, 10.0), &IndicatorConfig::default()).unwrap_err();
        assert_eq!(
            err,
            Error::TooShort {
                what: "indicator warmup",
                required: 34,
                actual: 10
            }
        );
    }

    #[test]
    fn constant_prices_give_neutral_rsi_and_collapsed_bands() {
        let ds = attach_indicators(flat_dataset(60, 42.0), &IndicatorConfig::default()).unwrap();
        for name in ["rsi_6", "rsi_12", "rsi_24"] {
            assert!(ds.column(name).unwrap().iter().flatten().all(|v| *v == 50.0));
        }
        for name in ["bb_upper", "bb_mid", "bb_lower"] {
            assert!(ds.column(name).unwrap().iter().flatten().all(|v| *v == 42.0));
        }
    }
}

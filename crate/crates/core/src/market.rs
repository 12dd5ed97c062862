//! Raw observations, the date-aligned dataset and summary statistics.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns every aligned dataset carries, in persisted order.
pub const BASE_COLUMNS: [&str; 6] = ["open", "high", "low", "close", "volume", "fng"];

/// One daily OHLCV observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Bar {
    /// Build a bar, checking the price ordering and sign invariants.
    pub fn new(
        date: NaiveDate,
        open: f64,
        high: f64,
        low: f64,
        close: f64,
        volume: f64,
    ) -> Result<Self> {
        let bar = Self {
            date,
            open,
            high,
            low,
            close,
            volume,
        };
        bar.validate()?;
        Ok(bar)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidBar {
                date: self.date,
                reason: reason.to_string(),
            })
        };
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return fail("prices must be finite and strictly positive");
        }
        if !self.volume.is_finite() || self.volume < 0.0 {
            return fail("volume must be finite and nonnegative");
        }
        if self.low > self.high {
            return fail("low above high");
        }
        if self.open < self.low || self.open > self.high {
            return fail("open outside [low, high]");
        }
        if self.close < self.low || self.close > self.high {
            return fail("close outside [low, high]");
        }
        Ok(())
    }

    pub fn typical_price(&self) -> f64 {
        (self.high + self.low + self.close) / 3.0
    }
}

/// One daily Fear & Greed reading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentPoint {
    pub date: NaiveDate,
    pub value: u8,
    pub classification: String,
}

impl SentimentPoint {
    pub fn new(date: NaiveDate, value: u8, classification: impl Into<String>) -> Result<Self> {
        if value > 100 {
            return Err(Error::InvalidConfig(alloc::format!(
                "sentiment value {value} on {date} outside 0..=100"
            )));
        }
        Ok(Self {
            date,
            value,
            classification: classification.into(),
        })
    }
}

/// A named series whose leading entries may be missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    /// Length of the missing prefix, or `None` if a gap follows the first
    /// present value.
    pub fn warmup(&self) -> Option<usize> {
        let first = self
            .values
            .iter()
            .position(Option::is_some)
            .unwrap_or(self.values.len());
        self.values[first..]
            .iter()
            .all(Option::is_some)
            .then_some(first)
    }
}

/// Bars and sentiment joined on date, optionally with indicator columns.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDataset {
    bars: Vec<Bar>,
    fng: Vec<u8>,
    indicators: Vec<Column>,
    warmup: usize,
}

impl AlignedDataset {
    /// Pairs `bars[i]` with `fng[i]`; dates must be strictly increasing.
    pub fn new(bars: Vec<Bar>, fng: Vec<u8>) -> Result<Self> {
        Self::from_parts(bars, fng, Vec::new())
    }

    /// Reassemble a dataset, validating dates, lengths and the warmup shape
    /// of every indicator column.
    pub fn from_parts(bars: Vec<Bar>, fng: Vec<u8>, indicators: Vec<Column>) -> Result<Self> {
        if bars.len() != fng.len() {
            return Err(Error::LengthMismatch(alloc::format!(
                "{} bars vs {} sentiment values",
                bars.len(),
                fng.len()
            )));
        }
        check_increasing(bars.iter().map(|b| b.date))?;
        if let Some(v) = fng.iter().find(|v| **v > 100) {
            return Err(Error::InvalidConfig(alloc::format!(
                "sentiment value {v} outside 0..=100"
            )));
        }
        let mut warmup = 0;
        for col in &indicators {
            if col.values.len() != bars.len() {
                return Err(Error::LengthMismatch(alloc::format!(
                    "column `{}` has {} values for {} rows",
                    col.name,
                    col.values.len(),
                    bars.len()
                )));
            }
            if BASE_COLUMNS.contains(&col.name.as_str()) {
                return Err(Error::Schema(alloc::format!(
                    "indicator column `{}` shadows a base column",
                    col.name
                )));
            }
            let w = col.warmup().ok_or_else(|| {
                Error::Schema(alloc::format!(
                    "column `{}` has a missing value after its warmup",
                    col.name
                ))
            })?;
            warmup = warmup.max(w);
        }
        Ok(Self {
            bars,
            fng,
            indicators,
            warmup,
        })
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn fng(&self) -> &[u8] {
        &self.fng
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.bars.iter().map(|b| b.date)
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn indicators(&self) -> &[Column] {
        &self.indicators
    }

    /// Index of the first row on which every column is present.
    pub fn warmup(&self) -> usize {
        self.warmup
    }

    pub fn is_complete(&self, row: usize) -> bool {
        row >= self.warmup && row < self.len()
    }

    /// Base columns followed by indicator columns.
    pub fn column_names(&self) -> Vec<String> {
        BASE_COLUMNS
            .iter()
            .map(|s| String::from(*s))
            .chain(self.indicators.iter().map(|c| c.name.clone()))
            .collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        BASE_COLUMNS
            .iter()
            .position(|c| *c == name)
            .or_else(|| {
                self.indicators
                    .iter()
                    .position(|c| c.name == name)
                    .map(|i| i + BASE_COLUMNS.len())
            })
    }

    /// Value of column `col` (as numbered by [`column_names`](Self::column_names)) on `row`.
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        let bar = &self.bars[row];
        match col {
            0 => Some(bar.open),
            1 => Some(bar.high),
            2 => Some(bar.low),
            3 => Some(bar.close),
            4 => Some(bar.volume),
            5 => Some(f64::from(self.fng[row])),
            c => self.indicators[c - BASE_COLUMNS.len()].values[row],
        }
    }

    pub fn column(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        Ok((0..self.len()).map(|r| self.value(r, idx)).collect())
    }

    /// Replace the indicator columns.
    pub fn with_indicators(self, indicators: Vec<Column>) -> Result<Self> {
        Self::from_parts(self.bars, self.fng, indicators)
    }

    /// Rows whose date lies in `[start, end]`.
    pub fn rows_between(&self, start: NaiveDate, end: NaiveDate) -> core::ops::Range<usize> {
        let lo = self.bars.partition_point(|b| b.date < start);
        let hi = self.bars.partition_point(|b| b.date <= end);
        lo..hi.max(lo)
    }
}

fn check_increasing(dates: impl Iterator<Item = NaiveDate>) -> Result<()> {
    let mut prev: Option<NaiveDate> = None;
    for d in dates {
        if prev.is_some_and(|p| d <= p) {
            return Err(Error::UnsortedDates(d));
        }
        prev = Some(d);
    }
    Ok(())
}

/// Result of [`align`]: the joined dataset plus what was dropped from each side.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub dataset: AlignedDataset,
    pub dropped_bars: usize,
    pub dropped_sentiment: usize,
}

/// Inner join on date. Both inputs must be strictly increasing by date.
pub fn align(bars: &[Bar], sentiment: &[SentimentPoint]) -> Result<Alignment> {
    check_increasing(bars.iter().map(|b| b.date))?;
    check_increasing(sentiment.iter().map(|s| s.date))?;

    let (mut i, mut j) = (0, 0);
    let mut joined_bars = Vec::new();
    let mut joined_fng = Vec::new();
    while i < bars.len() && j < sentiment.len() {
        match bars[i].date.cmp(&sentiment[j].date) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                joined_bars.push(bars[i]);
                joined_fng.push(sentiment[j].value);
                i += 1;
                j += 1;
            }
        }
    }
    if joined_bars.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let kept = joined_bars.len();
    Ok(Alignment {
        dataset: AlignedDataset::new(joined_bars, joined_fng)?,
        dropped_bars: bars.len() - kept,
        dropped_sentiment: sentiment.len() - kept,
    })
}

/// Distribution of one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    #[serde(rename = "25%")]
    pub q25: f64,
    #[serde(rename = "50%")]
    pub q50: f64,
    #[serde(rename = "75%")]
    pub q75: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub columns: Vec<ColumnSummary>,
}

impl SummaryStats {
    pub fn get(&self, name: &str) -> Option<&ColumnSummary> {
        self.columns.iter().find(|c| c.name == name)
    }
}

/// Linear-interpolated quantile of an ascending slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Summary of the present values of a series. Sample standard deviation
/// (n-1 denominator, 0 for a single value).
pub fn summarize_values(name: &str, values: &[f64]) -> Result<ColumnSummary> {
    if values.is_empty() {
        return Err(Error::EmptyColumn(name.to_string()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let std = if n > 1 {
        libm::sqrt(ss / (n - 1) as f64)
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(ColumnSummary {
        name: name.to_string(),
        count: n,
        mean,
        std,
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        q50: quantile_sorted(&sorted, 0.5),
        q75: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
    })
}

/// Summaries for the requested columns; missing entries are skipped.
pub fn summarize(dataset: &AlignedDataset, columns: &[&str]) -> Result<SummaryStats> {
    let columns = columns
        .iter()
        .map(|name| {
            let present: Vec<f64> = dataset.column(name)?.into_iter().flatten().collect();
            summarize_values(name, &present)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SummaryStats { columns })
}

//! Lagged feature vectors and train-fitted min-max scaling.
//!
//! Sample `i` describes target day `i` by every dataset column on the
//! `window` days before it (`t-3`, `t-2`, `t-1` for the default window of 3),
//! and its target is the close of day `i`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::IndicatorConfig;
use crate::linalg::Matrix;
use crate::market::{AlignedDataset, BASE_COLUMNS};

pub const DEFAULT_WINDOW: usize = 3;

/// How samples are laid out: which indicator schema is expected and how many
/// lag days feed each sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub indicators: IndicatorConfig,
    pub window: usize,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            indicators: IndicatorConfig::default(),
            window: DEFAULT_WINDOW,
        }
    }
}

impl FeatureSpec {
    /// Dataset columns in the order they appear inside one lag block.
    pub fn columns(&self) -> Vec<String> {
        BASE_COLUMNS
            .iter()
            .map(|c| String::from(*c))
            .chain(self.indicators.column_names())
            .collect()
    }

    pub fn n_features(&self) -> usize {
        self.window * self.columns().len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        let columns = self.columns();
        (1..=self.window)
            .rev()
            .flat_map(|lag| columns.iter().map(move |c| format!("{c}[t-{lag}]")))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub x: Matrix,
    pub y: Vec<f64>,
    /// Target date of each sample.
    pub sample_dates: Vec<NaiveDate>,
    pub feature_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn slice(&self, rows: Range<usize>) -> FeatureMatrix {
        FeatureMatrix {
            x: self.x.slice_rows(rows.clone()),
            y: self.y[rows.clone()].to_vec(),
            sample_dates: self.sample_dates[rows].to_vec(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Samples whose target date lies in `[start, end]`.
    pub fn rows_between(&self, start: NaiveDate, end: NaiveDate) -> Range<usize> {
        let lo = self.sample_dates.partition_point(|d| *d < start);
        let hi = self.sample_dates.partition_point(|d| *d <= end);
        lo..hi.max(lo)
    }

    pub fn position_of(&self, date: NaiveDate) -> Option<usize> {
        self.sample_dates.binary_search(&date).ok()
    }
}

/// Unnormalized samples from an indicator-attached dataset.
pub fn build_samples(dataset: &AlignedDataset, spec: &FeatureSpec) -> Result<FeatureMatrix> {
    let expected = spec.columns();
    let actual = dataset.column_names();
    if actual != expected {
        return Err(Error::Schema(format!(
            "dataset columns {actual:?} do not match expected {expected:?}"
        )));
    }
    if spec.window == 0 {
        return Err(Error::InvalidConfig("feature window must be >= 1".into()));
    }
    let first_target = dataset.warmup() + spec.window;
    let required = first_target + 1;
    if dataset.len() < required {
        return Err(Error::TooShort {
            what: "feature samples",
            required,
            actual: dataset.len(),
        });
    }
    let n_cols = expected.len();
    let n_features = spec.n_features();
    debug_assert_eq!(n_features, spec.window * n_cols);
    let n_samples = dataset.len() - first_target;
    let mut data = Vec::with_capacity(n_samples * n_features);
    let mut y = Vec::with_capacity(n_samples);
    let mut sample_dates = Vec::with_capacity(n_samples);
    let bars = dataset.bars();
    for i in first_target..dataset.len() {
        for lag in (1..=spec.window).rev() {
            let row = i - lag;
            for col in 0..n_cols {
                let v = dataset.value(row, col).ok_or_else(|| {
                    Error::Schema(format!("missing value in column {col} on row {row}"))
                })?;
                data.push(v);
            }
        }
        y.push(bars[i].close);
        sample_dates.push(bars[i].date);
    }
    Ok(FeatureMatrix {
        x: Matrix::from_vec(n_samples, n_features, data)?,
        y,
        sample_dates,
        feature_names: spec.feature_names(),
    })
}

/// Per-feature and target (min, max) ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub feature_min: Vec<f64>,
    pub feature_max: Vec<f64>,
    pub target_min: f64,
    pub target_max: f64,
}

fn scale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

impl Normalizer {
    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.feature_min.iter().zip(&self.feature_max))
            .map(|(&v, (&lo, &hi))| scale(v, lo, hi))
            .collect()
    }

    pub fn transform_target(&self, value: f64) -> f64 {
        scale(value, self.target_min, self.target_max)
    }

    /// Map a normalized target back to price units. Not clamped.
    pub fn inverse_transform_target(&self, value: f64) -> f64 {
        value * (self.target_max - self.target_min) + self.target_min
    }
}

/// Fit min/max ranges on the given sample rows only.
pub fn fit_normalizer(raw: &FeatureMatrix, train_rows: Range<usize>) -> Result<Normalizer> {
    if train_rows.is_empty() || train_rows.end > raw.len() {
        return Err(Error::InvalidConfig(format!(
            "training rows {train_rows:?} invalid for {} samples",
            raw.len()
        )));
    }
    let p = raw.n_features();
    let mut feature_min = alloc::vec![f64::INFINITY; p];
    let mut feature_max = alloc::vec![f64::NEG_INFINITY; p];
    for i in train_rows.clone() {
        for (j, &v) in raw.x.row(i).iter().enumerate() {
            feature_min[j] = feature_min[j].min(v);
            feature_max[j] = feature_max[j].max(v);
        }
    }
    let targets = &raw.y[train_rows];
    let target_min = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let target_max = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Normalizer {
        feature_min,
        feature_max,
        target_min,
        target_max,
    })
}

pub fn transform(raw: &FeatureMatrix, normalizer: &Normalizer) -> Result<FeatureMatrix> {
    if normalizer.feature_min.len() != raw.n_features() {
        return Err(Error::WidthMismatch {
            expected: normalizer.feature_min.len(),
            actual: raw.n_features(),
        });
    }
    let mut x = Matrix::zeros(raw.len(), raw.n_features());
    for i in 0..raw.len() {
        x.row_mut(i).copy_from_slice(&normalizer.transform_row(raw.x.row(i)));
    }
    Ok(FeatureMatrix {
        x,
        y: raw.y.iter().map(|&v| normalizer.transform_target(v)).collect(),
        sample_dates: raw.sample_dates.clone(),
        feature_names: raw.feature_names.clone(),
    })
}

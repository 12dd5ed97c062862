use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::Series;
use crate::error::{Error, Result};

pub(crate) fn check_period(period: usize) -> Result<()> {
    if period == 0 {
        return Err(Error::InvalidConfig("indicator period must be at least 1".into()));
    }
    Ok(())
}

/// Simple moving average over a trailing window of `period` values.
pub fn sma(values: &[f64], period: usize) -> Result<Series> {
    check_period(period)?;
    let mut out = vec![None; values.len()];
    for (i, w) in values.windows(period).enumerate() {
        out[i + period - 1] = Some(w.iter().sum::<f64>() / period as f64);
    }
    Ok(out)
}

/// Incremental simple moving average.
#[derive(Debug, Clone)]
pub struct Sma {
    period: usize,
    window: VecDeque<f64>,
}

impl Sma {
    pub fn new(period: usize) -> Result<Self> {
        check_period(period)?;
        Ok(Self {
            period,
            window: VecDeque::with_capacity(period),
        })
    }

    pub fn update(&mut self, value: f64) -> Option<f64> {
        if self.window.len() == self.period {
            self.window.pop_front();
        }
        self.window.push_back(value);
        (self.window.len() == self.period)
            .then(|| self.window.iter().sum::<f64>() / self.period as f64)
    }

    pub(crate) fn window(&self) -> Option<Vec<f64>> {
        (self.window.len() == self.period).then(|| self.window.iter().copied().collect())
    }
}

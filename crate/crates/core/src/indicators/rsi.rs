use alloc::vec;
use alloc::vec::Vec;

use super::sma::check_period;
use super::Series;
use crate::error::Result;

fn rsi_value(avg_gain: f64, avg_loss: f64) -> f64 {
    match (avg_gain > 0.0, avg_loss > 0.0) {
        (false, false) => 50.0,
        (true, false) => 100.0,
        (false, true) => 0.0,
        (true, true) => 100.0 - 100.0 / (1.0 + avg_gain / avg_loss),
    }
}

/// Relative strength index with Wilder smoothing. Defined from index `period`.
pub fn rsi(close: &[f64], period: usize) -> Result<Series> {
    check_period(period)?;
    let mut out = vec![None; close.len()];
    if close.len() <= period {
        return Ok(out);
    }
    let p = period as f64;
    let gains: Vec<f64> = close.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
    let losses: Vec<f64> = close.windows(2).map(|w| (w[0] - w[1]).max(0.0)).collect();
    let mut g = gains[..period].iter().sum::<f64>() / p;
    let mut l = losses[..period].iter().sum::<f64>() / p;
    out[period] = Some(rsi_value(g, l));
    for k in period..gains.len() {
        g = (g * (p - 1.0) + gains[k]) / p;
        l = (l * (p - 1.0) + losses[k]) / p;
        out[k + 1] = Some(rsi_value(g, l));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Rsi {
    period: usize,
    prev: Option<f64>,
    diffs: usize,
    gain: f64,
    loss: f64,
}

impl Rsi {
    pub fn new(period: usize) -> Result<Self> {
        check_period(period)?;
        Ok(Self {
            period,
            prev: None,
            diffs: 0,
            gain: 0.0,
            loss: 0.0,
        })
    }

    pub fn update(&mut self, close: f64) -> Option<f64> {
        let prev = self.prev.replace(close)?;
        let change = close - prev;
        let (g, l) = (change.max(0.0), (-change).max(0.0));
        self.diffs += 1;
        let p = self.period as f64;
        if self.diffs < self.period {
            self.gain += g;
            self.loss += l;
            return None;
        }
        if self.diffs == self.period {
            self.gain = (self.gain + g) / p;
            self.loss = (self.loss + l) / p;
        } else {
            self.gain = (self.gain * (p - 1.0) + g) / p;
            self.loss = (self.loss * (p - 1.0) + l) / p;
        }
        Some(rsi_value(self.gain, self.loss))
    }
}

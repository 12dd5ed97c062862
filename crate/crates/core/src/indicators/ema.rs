use alloc::vec;
use alloc::vec::Vec;

use super::sma::check_period;
use super::Series;
use crate::error::Result;

/// Exponential moving average with smoothing `2 / (period + 1)`, seeded by
/// the simple mean of the first `period` values.
pub fn ema(values: &[f64], period: usize) -> Result<Series> {
    check_period(period)?;
    let mut out = vec![None; values.len()];
    if values.len() < period {
        return Ok(out);
    }
    let alpha = 2.0 / (period as f64 + 1.0);
    let mut e = values[..period].iter().sum::<f64>() / period as f64;
    out[period - 1] = Some(e);
    for (slot, &x) in out[period..].iter_mut().zip(&values[period..]) {
        e = alpha * x + (1.0 - alpha) * e;
        *slot = Some(e);
    }
    Ok(out)
}

/// EMA over a series whose leading entries may be missing. The average starts
/// at the first present value; later gaps are not expected.
pub fn ema_of_series(values: &Series, period: usize) -> Result<Series> {
    check_period(period)?;
    let Some(start) = values.iter().position(Option::is_some) else {
        return Ok(vec![None; values.len()]);
    };
    let tail: Vec<f64> = values[start..].iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let mut out = vec![None; start];
    out.extend(ema(&tail, period)?);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Ema {
    period: usize,
    alpha: f64,
    seen: usize,
    seed_sum: f64,
    value: Option<f64>,
}

impl Ema {
    pub fn new(period: usize) -> Result<Self> {
        check_period(period)?;
        Ok(Self {
            period,
            alpha: 2.0 / (period as f64 + 1.0),
            seen: 0,
            seed_sum: 0.0,
            value: None,
        })
    }

    pub fn update(&mut self, x: f64) -> Option<f64> {
        self.seen += 1;
        self.value = match self.value {
            Some(prev) => Some(self.alpha * x + (1.0 - self.alpha) * prev),
            None => {
                self.seed_sum += x;
                (self.seen == self.period).then(|| self.seed_sum / self.period as f64)
            }
        };
        self.value
    }
}

use super::ema::{ema, ema_of_series};
use super::{MacdParams, Series};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MacdSeries {
    pub line: Series,
    pub signal: Series,
    pub histogram: Series,
}

/// MACD line (fast EMA minus slow EMA), its signal EMA and the histogram.
pub fn macd(close: &[f64], params: MacdParams) -> Result<MacdSeries> {
    params.validate()?;
    let fast = ema(close, params.fast)?;
    let slow = ema(close, params.slow)?;
    let line: Series = fast
        .iter()
        .zip(&slow)
        .map(|(f, s)| Some((*f)? - (*s)?))
        .collect();
    let signal = ema_of_series(&line, params.signal)?;
    let histogram = line
        .iter()
        .zip(&signal)
        .map(|(l, s)| Some((*l)? - (*s)?))
        .collect();
    Ok(MacdSeries {
        line,
        signal,
        histogram,
    })
}

impl MacdParams {
    pub fn validate(&self) -> Result<()> {
        if self.fast == 0 || self.signal == 0 || self.fast >= self.slow {
            return Err(Error::InvalidConfig(alloc::format!(
                "MACD needs 1 <= fast < slow and signal >= 1, got ({}, {}, {})",
                self.fast,
                self.slow,
                self.signal
            )));
        }
        Ok(())
    }
}

/// Incremental MACD.
#[derive(Debug, Clone)]
pub struct Macd {
    fast: super::Ema,
    slow: super::Ema,
    signal: super::Ema,
}

impl Macd {
    pub fn new(params: MacdParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            fast: super::Ema::new(params.fast)?,
            slow: super::Ema::new(params.slow)?,
            signal: super::Ema::new(params.signal)?,
        })
    }

    /// Returns `(line, signal, histogram)`.
    pub fn update(&mut self, close: f64) -> (Option<f64>, Option<f64>, Option<f64>) {
        let f = self.fast.update(close);
        let s = self.slow.update(close);
        let line = f.zip(s).map(|(f, s)| f - s);
        let signal = line.and_then(|l| self.signal.update(l));
        let hist = line.zip(signal).map(|(l, s)| l - s);
        (line, signal, hist)
    }
}

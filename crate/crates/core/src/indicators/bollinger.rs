use alloc::vec;

use super::sma::{sma, Sma};
use super::Series;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BollingerSeries {
    pub upper: Series,
    pub mid: Series,
    pub lower: Series,
}

/// Bollinger bands: SMA mid line, offset by `width` population standard
/// deviations of the same window.
pub fn bollinger(close: &[f64], period: usize, width: f64) -> Result<BollingerSeries> {
    // Validates the parameters.
    Bollinger::new(period, width)?;
    let mid = sma(close, period)?;
    let mut upper = vec![None; close.len()];
    let mut lower = vec![None; close.len()];
    for (i, w) in close.windows(period).enumerate() {
        let t = i + period - 1;
        let m = mid[t].unwrap_or_default();
        let var = w.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / period as f64;
        let offset = width * libm::sqrt(var);
        upper[t] = Some(m + offset);
        lower[t] = Some(m - offset);
    }
    Ok(BollingerSeries { upper, mid, lower })
}

#[derive(Debug, Clone)]
pub struct Bollinger {
    sma: Sma,
    width: f64,
}

impl Bollinger {
    pub fn new(period: usize, width: f64) -> Result<Self> {
        if period < 2 {
            return Err(Error::InvalidConfig("bollinger period must be at least 2".into()));
        }
        if !width.is_finite() || width < 0.0 {
            return Err(Error::InvalidConfig("bollinger width must be finite and >= 0".into()));
        }
        Ok(Self {
            sma: Sma::new(period)?,
            width,
        })
    }

    /// Returns `(upper, mid, lower)` once the window is full.
    pub fn update(&mut self, close: f64) -> Option<(f64, f64, f64)> {
        let mid = self.sma.update(close)?;
        let window = self.sma.window()?;
        let var = window.iter().map(|x| (x - mid) * (x - mid)).sum::<f64>() / window.len() as f64;
        let offset = self.width * libm::sqrt(var);
        Some((mid + offset, mid, mid - offset))
    }
}

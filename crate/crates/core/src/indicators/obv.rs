use alloc::vec::Vec;

use crate::error::{Error, Result};

/// On-balance volume, starting at 0.
pub fn obv(close: &[f64], volume: &[f64]) -> Result<Vec<f64>> {
    if close.len() != volume.len() {
        return Err(Error::LengthMismatch(alloc::format!(
            "obv: {} closes vs {} volumes",
            close.len(),
            volume.len()
        )));
    }
    let mut out = Vec::with_capacity(close.len());
    let mut total = 0.0;
    for i in 0..close.len() {
        if i > 0 {
            if close[i] > close[i - 1] {
                total += volume[i];
            } else if close[i] < close[i - 1] {
                total -= volume[i];
            }
        }
        out.push(total);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct Obv {
    prev: Option<f64>,
    total: f64,
}

impl Obv {
    pub fn update(&mut self, close: f64, volume: f64) -> f64 {
        if let Some(prev) = self.prev {
            if close > prev {
                self.total += volume;
            } else if close < prev {
                self.total -= volume;
            }
        }
        self.prev = Some(close);
        self.total
    }
}

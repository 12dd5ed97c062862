use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::sma::check_period;
use super::Series;
use crate::error::Result;
use crate::market::Bar;

/// Money flow index over `period` trailing flows. Defined from index `period`.
pub fn mfi(bars: &[Bar], period: usize) -> Result<Series> {
    check_period(period)?;
    let mut out = vec![None; bars.len()];
    // flows[k] belongs to bar k + 1.
    let flows: Vec<(f64, f64)> = bars
        .windows(2)
        .map(|w| {
            let (prev, tp) = (w[0].typical_price(), w[1].typical_price());
            let raw = tp * w[1].volume;
            if tp > prev {
                (raw, 0.0)
            } else if tp < prev {
                (0.0, raw)
            } else {
                (0.0, 0.0)
            }
        })
        .collect();
    for (k, win) in flows.windows(period).enumerate() {
        let (pos, neg) = win.iter().fold((0.0, 0.0), |(p, n), (fp, fnn)| (p + fp, n + fnn));
        let total = pos + neg;
        out[k + period] = Some(if total > 0.0 { 100.0 * (pos / total) } else { 50.0 });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Mfi {
    period: usize,
    prev_typical: Option<f64>,
    /// (positive flow, negative flow) per step.
    flows: VecDeque<(f64, f64)>,
}

impl Mfi {
    pub fn new(period: usize) -> Result<Self> {
        check_period(period)?;
        Ok(Self {
            period,
            prev_typical: None,
            flows: VecDeque::with_capacity(period),
        })
    }

    pub fn update(&mut self, bar: &Bar) -> Option<f64> {
        let tp = bar.typical_price();
        let prev = self.prev_typical.replace(tp)?;
        let raw = tp * bar.volume;
        let flow = if tp > prev {
            (raw, 0.0)
        } else if tp < prev {
            (0.0, raw)
        } else {
            (0.0, 0.0)
        };
        if self.flows.len() == self.period {
            self.flows.pop_front();
        }
        self.flows.push_back(flow);
        if self.flows.len() < self.period {
            return None;
        }
        let (pos, neg) = self
            .flows
            .iter()
            .fold((0.0, 0.0), |(p, n), (fp, fnn)| (p + fp, n + fnn));
        let total = pos + neg;
        Some(if total > 0.0 { 100.0 * (pos / total) } else { 50.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn bars(closes: &[f64]) -> alloc::vec::Vec<Bar> {
        let d0 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        closes
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                Bar::new(d0 + chrono::Days::new(i as u64), c, c + 1.0, c - 1.0, c, 1000.0 + i as f64)
                    .unwrap()
            })
            .collect()
    }

    #[test]
    fn rising_is_100_falling_is_0() {
        let up: alloc::vec::Vec<f64> = (0..30).map(|t| 50.0 + t as f64).collect();
        let down: alloc::vec::Vec<f64> = up.iter().rev().copied().collect();
        let m_up = mfi(&bars(&up), 14).unwrap();
        assert!(m_up[..14].iter().all(Option::is_none));
        assert!(m_up[14..].iter().all(|v| *v == Some(100.0)));
        assert!(mfi(&bars(&down), 14).unwrap()[14..].iter().all(|v| *v == Some(0.0)));
    }

    #[test]
    fn flat_typical_price_is_50() {
        assert!(mfi(&bars(&[20.0; 20]), 5).unwrap()[5..]
            .iter()
            .all(|v| *v == Some(50.0)));
    }
}

//! Seeded synthetic market and sentiment series for offline runs.

use fngcast_core::market::{Bar, SentimentPoint};
use fngcast_core::rng::rng_from_seed;
use fngcast_core::NaiveDate;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub start: NaiveDate,
    pub days: usize,
    pub seed: u64,
    pub start_price: f64,
    pub daily_volatility: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2018, 2, 1).expect("valid date"),
            days: 1796,
            seed: 0,
            start_price: 9000.0,
            daily_volatility: 0.035,
        }
    }
}

pub fn classify(value: u8) -> &'static str {
    match value {
        0..=24 => "Extreme Fear",
        25..=46 => "Fear",
        47..=54 => "Neutral",
        55..=75 => "Greed",
        _ => "Extreme Greed",
    }
}

/// Log-normal walk with mild momentum; sentiment tracks recent returns.
/// Every 150th day has no sentiment reading, so alignment has work to do.
pub fn generate(cfg: &SyntheticConfig) -> (Vec<Bar>, Vec<SentimentPoint>) {
    let mut rng = rng_from_seed(cfg.seed);
    let mut close = cfg.start_price;
    let mut prev_ret = 0.0;
    let mut recent = 0.0;
    let mut bars = Vec::with_capacity(cfg.days);
    let mut points = Vec::with_capacity(cfg.days);
    for i in 0..cfg.days {
        let date = cfg.start + chrono::Days::new(i as u64);
        let shock = rng.random_range(-1.0..1.0) * cfg.daily_volatility * 3f64.sqrt();
        let ret = 0.2 * prev_ret + shock;
        let open = close;
        close = (close * ret.exp()).max(1.0);
        let high = open.max(close) * (1.0 + rng.random_range(0.0..0.02));
        let low = open.min(close) * (1.0 - rng.random_range(0.0..0.02));
        let volume = 2e10 * (1.0 + 4.0 * ret.abs()) * rng.random_range(0.5..1.5);
        bars.push(Bar::new(date, open, high, low, close, volume).expect("consistent synthetic bar"));
        recent = 0.8 * recent + 0.2 * ret;
        let value = (50.0 + 900.0 * recent + rng.random_range(-6.0..6.0)).clamp(0.0, 100.0).round() as u8;
        if i % 150 != 149 {
            points.push(SentimentPoint::new(date, value, classify(value)).expect("value in range"));
        }
        prev_ret = ret;
    }
    (bars, points)
}

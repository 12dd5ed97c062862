//! Seeded synthetic market data.
#![allow(dead_code)]

use fngcast_core::market::{AlignedDataset, Bar};
use fngcast_core::{Matrix, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn day(offset: usize) -> NaiveDate {
    NaiveDate::from_ymd_opt(2018, 2, 1).unwrap() + chrono::Days::new(offset as u64)
}

/// Geometric random walk with consistent OHLC ranges.
pub fn random_walk_bars(n: usize, seed: u64) -> Vec<Bar> {
    let mut r = rng(seed);
    let mut close: f64 = 100.0 + r.random_range(0.0..50.0);
    (0..n)
        .map(|i| {
            let open = close;
            close = (close * (1.0 + r.random_range(-0.04..0.04))).max(1.0);
            let high = open.max(close) * (1.0 + r.random_range(0.0..0.02));
            let low = open.min(close) * (1.0 - r.random_range(0.0..0.02));
            let volume = r.random_range(1e3..1e6);
            Bar::new(day(i), open, high, low, close, volume).unwrap()
        })
        .collect()
}

/// Walk with a fraction of days exactly repeating the previous bar.
pub fn walk_with_flat_days(n: usize, seed: u64) -> Vec<Bar> {
    let mut bars = random_walk_bars(n, seed);
    let mut r = rng(seed ^ 0xabcdef);
    for i in 1..n {
        if r.random_bool(0.15) {
            let p = bars[i - 1];
            bars[i] = Bar::new(day(i), p.open, p.high, p.low, p.close, bars[i].volume).unwrap();
        }
    }
    bars
}

pub fn random_fng(n: usize, seed: u64) -> Vec<u8> {
    let mut r = rng(seed);
    let mut v: i32 = 50;
    (0..n)
        .map(|_| {
            v = (v + r.random_range(-8..=8)).clamp(0, 100);
            v as u8
        })
        .collect()
}

pub fn dataset(n: usize, seed: u64) -> AlignedDataset {
    AlignedDataset::new(random_walk_bars(n, seed), random_fng(n, seed + 1)).unwrap()
}

pub fn closes(bars: &[Bar]) -> Vec<f64> {
    bars.iter().map(|b| b.close).collect()
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..rows).map(|_| (0..cols).map(|_| r.random_range(0.0..1.0)).collect()).collect()
}

pub fn to_matrix(rows: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

//! Second-order boosting for squared loss with `gbtree`, `dart` and
//! `gblinear` boosters.
//!
//! With `g = prediction - y` and unit hessians, tree leaves take
//! `-G / (H + lambda)` and splits are scored by the regularised gain; see
//! [`newton_gain`](super::tree::newton_gain).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{GrowParams, Presorted, SplitRule, Tree, TreeGrower};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoosterKind {
    Gbtree,
    Gblinear,
    Dart,
}

impl BoosterKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gbtree" => Ok(Self::Gbtree),
            "gblinear" => Ok(Self::Gblinear),
            "dart" => Ok(Self::Dart),
            other => Err(Error::UnknownBooster(other.into())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gbtree => "gbtree",
            Self::Gblinear => "gblinear",
            Self::Dart => "dart",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XgbParams {
    pub booster: BoosterKind,
    pub lambda: f64,
    pub max_delta_step: f64,
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub rate_drop: f64,
    pub seed: u64,
}

impl XgbParams {
    pub fn new(booster: BoosterKind) -> Self {
        Self {
            booster,
            lambda: 1.0,
            max_delta_step: 0.0,
            n_rounds: 100,
            learning_rate: 0.3,
            max_depth: 6,
            rate_drop: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Booster {
    /// Trees (leaves already scaled by the learning rate) and their weights.
    Trees { trees: Vec<Tree>, weights: Vec<f64> },
    Linear { bias: f64, weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XgbModel {
    pub base_score: f64,
    pub booster: Booster,
}

impl XgbModel {
    pub fn fit(x: &Matrix, y: &[f64], params: &XgbParams) -> Result<Self> {
        let n = x.rows();
        if n == 0 || y.len() != n {
            return Err(Error::LengthMismatch(alloc::format!("xgb: {n} rows vs {} targets", y.len())));
        }
        if !(params.lambda >= 0.0) || !(params.max_delta_step >= 0.0) {
            return Err(Error::Hyperparameter("lambda and max_delta_step must be >= 0".into()));
        }
        if !(params.learning_rate > 0.0) || !(0.0..=1.0).contains(&params.rate_drop) {
            return Err(Error::Hyperparameter("learning_rate must be > 0 and rate_drop in [0, 1]".into()));
        }
        let base_score = y.iter().sum::<f64>() / n as f64;
        let booster = match params.booster {
            BoosterKind::Gblinear => fit_linear(x, y, base_score, params),
            BoosterKind::Gbtree | BoosterKind::Dart => fit_trees(x, y, base_score, params),
        };
        Ok(Self { base_score, booster })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.base_score
            + match &self.booster {
                Booster::Trees { trees, weights } => trees
                    .iter()
                    .zip(weights)
                    .map(|(t, w)| w * t.predict_row(row))
                    .sum::<f64>(),
                Booster::Linear { bias, weights } => {
                    bias + weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>()
                }
            }
    }
}

fn fit_trees(x: &Matrix, y: &[f64], base: f64, params: &XgbParams) -> Booster {
    let n = x.rows();
    let presorted = Presorted::new(x);
    let grower = TreeGrower::new(x, &presorted);
    let rule = SplitRule::Newton {
        lambda: params.lambda,
        max_delta_step: params.max_delta_step,
    };
    let grow = GrowParams {
        max_depth: Some(params.max_depth),
        max_leaf_nodes: None,
        min_samples_leaf: 1,
        max_features: None,
    };
    let eta = params.learning_rate;
    let dart = params.booster == BoosterKind::Dart;
    let mut rng = rng_from_seed(params.seed);
    let mut trees: Vec<Tree> = Vec::with_capacity(params.n_rounds);
    let mut weights: Vec<f64> = Vec::with_capacity(params.n_rounds);
    // Unweighted per-tree outputs on the training rows.
    let mut cached: Vec<Vec<f64>> = Vec::with_capacity(params.n_rounds);
    let mut dropped: Vec<usize> = Vec::new();
    for _ in 0..params.n_rounds {
        dropped.clear();
        if dart && params.rate_drop > 0.0 {
            for i in 0..trees.len() {
                if rng.random::<f64>() < params.rate_drop {
                    dropped.push(i);
                }
            }
        }
        let mut pred = vec![base; n];
        for (t, out) in cached.iter().enumerate() {
            if dropped.binary_search(&t).is_ok() {
                continue;
            }
            for (p, o) in pred.iter_mut().zip(out) {
                *p += weights[t] * o;
            }
        }
        let grad: Vec<f64> = pred.iter().zip(y).map(|(p, t)| p - t).collect();
        let mut tree = grower.grow(&grad, None, rule, &grow, &mut rng, None);
        tree.scale_leaves(eta);
        let out: Vec<f64> = (0..n).map(|i| tree.predict_row(x.row(i))).collect();
        let k = dropped.len() as f64;
        let new_weight = if dropped.is_empty() {
            1.0
        } else {
            let factor = k / (k + eta);
            for &d in &dropped {
                weights[d] *= factor;
            }
            1.0 / (k + eta)
        };
        trees.push(tree);
        weights.push(new_weight);
        cached.push(out);
    }
    Booster::Trees { trees, weights }
}

fn fit_linear(x: &Matrix, y: &[f64], base: f64, params: &XgbParams) -> Booster {
    let (n, p) = (x.rows(), x.cols());
    let eta = params.learning_rate;
    // Penalty scaled by the total instance weight.
    let lambda = params.lambda * n as f64;
    let mut bias = 0.0;
    let mut weights = vec![0.0; p];
    let mut grad: Vec<f64> = y.iter().map(|t| base - t).collect();
    for _ in 0..params.n_rounds {
        let db = -eta * grad.iter().sum::<f64>() / n as f64;
        bias += db;
        grad.iter_mut().for_each(|g| *g += db);
        for j in 0..p {
            let (mut sg, mut sh) = (0.0, 0.0);
            for (i, g) in grad.iter().enumerate() {
                let v = x.get(i, j);
                sg += g * v;
                sh += v * v;
            }
            if sh < 1e-5 {
                continue;
            }
            let dw = -eta * (sg + lambda * weights[j]) / (sh + lambda);
            if dw == 0.0 {
                continue;
            }
            weights[j] += dw;
            for (i, g) in grad.iter_mut().enumerate() {
                *g += dw * x.get(i, j);
            }
        }
    }
    Booster::Linear { bias, weights }
}

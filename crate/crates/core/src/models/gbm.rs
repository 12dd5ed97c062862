//! Least-squares gradient boosting of regression trees.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::{GrowParams, Presorted, SplitRule, Tree, TreeGrower};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct BoostingParams {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub max_depth: Option<usize>,
    pub max_leaf_nodes: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for BoostingParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            n_estimators: 100,
            max_depth: Some(3),
            max_leaf_nodes: None,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl GradientBoosting {
    /// Stage 0 predicts the mean; every stage fits a tree to the current
    /// residuals with Friedman's split score and adds `learning_rate` times it.
    pub fn fit(x: &Matrix, y: &[f64], params: &BoostingParams) -> Result<Self> {
        let n = x.rows();
        if n == 0 || y.len() != n {
            return Err(Error::LengthMismatch(alloc::format!("boosting: {n} rows vs {} targets", y.len())));
        }
        if !(params.learning_rate > 0.0) {
            return Err(Error::Hyperparameter("learning_rate must be > 0".into()));
        }
        if params.max_leaf_nodes.is_some_and(|m| m < 2) {
            return Err(Error::Hyperparameter("max_leaf_nodes must be >= 2".into()));
        }
        let init = y.iter().sum::<f64>() / n as f64;
        let grow = GrowParams {
            max_depth: params.max_depth,
            max_leaf_nodes: params.max_leaf_nodes,
            min_samples_leaf: params.min_samples_leaf,
            max_features: None,
        };
        let presorted = Presorted::new(x);
        let grower = TreeGrower::new(x, &presorted);
        // All features are scanned, so the generator is never drawn from.
        let mut rng = rng_from_seed(0);
        let mut pred = alloc::vec![init; n];
        let mut trees = Vec::with_capacity(params.n_estimators);
        for _ in 0..params.n_estimators {
            let residual: Vec<f64> = y.iter().zip(&pred).map(|(t, p)| t - p).collect();
            let tree = grower.grow(&residual, None, SplitRule::FriedmanMse, &grow, &mut rng, None);
            for (i, p) in pred.iter_mut().enumerate() {
                *p += params.learning_rate * tree.predict_row(x.row(i));
            }
            trees.push(tree);
        }
        Ok(Self {
            init,
            learning_rate: params.learning_rate,
            trees,
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.init
            + self
                .trees
                .iter()
                .map(|t| self.learning_rate * t.predict_row(row))
                .sum::<f64>()
    }

    /// Predictions after each stage, stage 0 first.
    pub fn staged_predict_row(&self, row: &[f64]) -> Vec<f64> {
        let mut acc = self.init;
        let mut out = alloc::vec![acc];
        for t in &self.trees {
            acc += self.learning_rate * t.predict_row(row);
            out.push(acc);
        }
        out
    }
}

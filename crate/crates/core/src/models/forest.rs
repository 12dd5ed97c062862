//! Bagged regression trees.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{GrowParams, Presorted, SplitRule, Tree, TreeGrower};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForestCriterion {
    SquaredError,
    Poisson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub criterion: ForestCriterion,
    pub n_estimators: usize,
    pub max_leaf_nodes: Option<usize>,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    /// Draw a bootstrap sample per tree. Only tests switch this off.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            criterion: ForestCriterion::SquaredError,
            n_estimators: 150,
            max_leaf_nodes: None,
            min_samples_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<Tree>,
}

impl RandomForest {
    pub fn fit(x: &Matrix, y: &[f64], params: &ForestParams) -> Result<Self> {
        let n = x.rows();
        if n == 0 || y.len() != n {
            return Err(Error::LengthMismatch(alloc::format!("forest: {n} rows vs {} targets", y.len())));
        }
        if params.n_estimators == 0 {
            return Err(Error::Hyperparameter("n_estimators must be >= 1".into()));
        }
        if params.max_leaf_nodes.is_some_and(|m| m < 2) {
            return Err(Error::Hyperparameter("max_leaf_nodes must be >= 2".into()));
        }
        let rule = match params.criterion {
            ForestCriterion::SquaredError => SplitRule::SquaredError,
            ForestCriterion::Poisson => {
                if let Some(v) = y.iter().find(|v| **v < 0.0) {
                    return Err(Error::NegativeTarget(*v));
                }
                SplitRule::Poisson
            }
        };
        let grow = GrowParams {
            max_depth: params.max_depth,
            max_leaf_nodes: params.max_leaf_nodes,
            min_samples_leaf: params.min_samples_leaf,
            max_features: Some(x.cols().div_ceil(3).max(1)),
        };
        let presorted = Presorted::new(x);
        let grower = TreeGrower::new(x, &presorted);
        let trees = (0..params.n_estimators)
            .map(|t| {
                let mut rng = rng_from_seed(derive_seed(params.seed, &[t as u64]));
                let multiplicity = params.bootstrap.then(|| {
                    let mut m = vec![0u32; n];
                    for _ in 0..n {
                        m[rng.random_range(0..n)] += 1;
                    }
                    m
                });
                grower.grow(y, multiplicity.as_deref(), rule, &grow, &mut rng, None)
            })
            .collect();
        Ok(Self { trees })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(n: usize) -> (Matrix, Vec<f64>) {
        let rows: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                [t, libm::sin(7.0 * t), ((i * 13) % n) as f64 / n as f64]
            })
            .collect();
        let y = rows.iter().map(|r| 0.5 + 0.3 * r[1] + 0.1 * r[0]).collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn single_unbagged_tree_memorizes() {
        let (x, y) = fixture(40);
        let params = ForestParams {
            n_estimators: 1,
            bootstrap: false,
            ..ForestParams::default()
        };
        // One feature of three per split still reaches pure leaves.
        let f = RandomForest::fit(&x, &y, &params).unwrap();
        for i in 0..x.rows() {
            assert_eq!(f.predict_row(x.row(i)), y[i]);
        }
    }

    #[test]
    fn constant_target_any_criterion() {
        let (x, _) = fixture(30);
        for criterion in [ForestCriterion::SquaredError, ForestCriterion::Poisson] {
            let params = ForestParams {
                criterion,
                n_estimators: 5,
                ..ForestParams::default()
            };
            let f = RandomForest::fit(&x, &[0.4; 30], &params).unwrap();
            assert!((f.predict_row(x.row(3)) - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_rejects_negative_targets() {
        let (x, mut y) = fixture(10);
        y[2] = -0.1;
        let params = ForestParams {
            criterion: ForestCriterion::Poisson,
            ..ForestParams::default()
        };
        assert_eq!(RandomForest::fit(&x, &y, &params).unwrap_err(), Error::NegativeTarget(-0.1));
    }

    #[test]
    fn same_seed_same_forest() {
        let (x, y) = fixture(50);
        let params = ForestParams {
            n_estimators: 10,
            max_leaf_nodes: Some(10),
            seed: 9,
            ..ForestParams::default()
        };
        assert_eq!(RandomForest::fit(&x, &y, &params).unwrap(), RandomForest::fit(&x, &y, &params).unwrap());
    }
}

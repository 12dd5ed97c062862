//! Ordinary least squares with intercept.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coef: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    /// Least-squares fit. Columns are centred so the intercept is not
    /// penalised, then the minimum-norm solution is taken from an SVD, which
    /// also covers rank-deficient designs.
    pub fn fit(x: &Matrix, y: &[f64]) -> Result<Self> {
        let (n, p) = (x.rows(), x.cols());
        if n == 0 {
            return Err(Error::TooShort {
                what: "linear regression",
                required: 1,
                actual: 0,
            });
        }
        if y.len() != n {
            return Err(Error::LengthMismatch(alloc::format!("{n} rows vs {} targets", y.len())));
        }
        let x_mean: Vec<f64> = (0..p)
            .map(|j| x.iter_rows().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let y_mean = y.iter().sum::<f64>() / n as f64;
        if p == 0 {
            return Ok(Self {
                coef: Vec::new(),
                intercept: y_mean,
            });
        }
        let a = DMatrix::from_fn(n, p, |i, j| x.get(i, j) - x_mean[j]);
        let b = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let svd = a.svd(true, true);
        let max_sv = svd.singular_values.max();
        let tol = max_sv * n.max(p) as f64 * f64::EPSILON;
        let beta = svd
            .solve(&b, tol)
            .map_err(|e| Error::InvalidConfig(alloc::format!("least squares: {e}")))?;
        let coef: Vec<f64> = beta.iter().copied().collect();
        let intercept = y_mean - coef.iter().zip(&x_mean).map(|(c, m)| c * m).sum::<f64>();
        Ok(Self { coef, intercept })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + self.coef.iter().zip(row).map(|(c, v)| c * v).sum::<f64>()
    }
}

//! Epsilon-insensitive support vector regression.
//!
//! The dual is solved in the doubled-variable form: `beta = [alpha; alpha*]`,
//! signs `s = [+1; -1]`,
//!
//! ```text
//! min  1/2 beta' Q beta + p' beta   s.t.  s' beta = 0,  0 <= beta <= C
//! Q_ij = s_i s_j K(x_i, x_j),  p = [eps - y; eps + y]
//! ```
//!
//! by sequential minimal optimization with second-order working set
//! selection. The regression function is
//! `f(x) = sum_i (alpha_i - alpha*_i) K(x_i, x) - rho`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                libm::exp(-gamma * d2)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrParams {
    pub c: f64,
    pub kernel: Kernel,
    pub epsilon: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// `None` means `max(10_000_000, 100 * n)`.
    pub max_iter: Option<usize>,
}

impl SvrParams {
    pub fn new(c: f64, kernel: Kernel) -> Self {
        Self {
            c,
            kernel,
            epsilon: 0.01,
            tol: 1e-3,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: Kernel,
    pub support_vectors: Matrix,
    /// `alpha_i - alpha*_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
    pub dual_objective: f64,
}

/// Raw solver output, indexed like the doubled problem.
#[derive(Debug, Clone)]
pub struct SvrSolution {
    /// `[alpha; alpha*]`, length `2n`.
    pub beta: Vec<f64>,
    pub rho: f64,
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
}

fn kernel_matrix(x: &Matrix, kernel: Kernel) -> Vec<f64> {
    let n = x.rows();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(x.row(i), x.row(j));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Solve the SVR dual on `x`, `y`.
pub fn solve_dual(x: &Matrix, y: &[f64], params: &SvrParams) -> Result<SvrSolution> {
    let n = x.rows();
    if n == 0 || y.len() != n {
        return Err(Error::LengthMismatch(alloc::format!("svr: {n} rows vs {} targets", y.len())));
    }
    if !(params.c > 0.0) || !(params.epsilon >= 0.0) || !(params.tol > 0.0) {
        return Err(Error::Hyperparameter(alloc::format!(
            "svr needs C > 0, epsilon >= 0, tol > 0 (got C={}, epsilon={}, tol={})",
            params.c,
            params.epsilon,
            params.tol
        )));
    }
    let k = kernel_matrix(x, params.kernel);
    let l = 2 * n;
    let c = params.c;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let kk = |a: usize, b: usize| k[(a % n) * n + (b % n)];
    let q = |a: usize, b: usize| sign(a) * sign(b) * kk(a, b);

    let p: Vec<f64> = (0..l)
        .map(|t| if t < n { params.epsilon - y[t] } else { params.epsilon + y[t - n] })
        .collect();
    let mut beta = vec![0.0; l];
    let mut grad = p.clone();
    let max_iter = params.max_iter.unwrap_or((100 * l).max(10_000_000));

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // Working set selection, second-order rule.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..l {
            let v = if t < n {
                (beta[t] < c).then(|| -grad[t])
            } else {
                (beta[t] > 0.0).then(|| grad[t])
            };
            if let Some(v) = v {
                if v >= gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let Some(i) = i_sel else {
            converged = true;
            break;
        };
        let si = sign(i);
        let qii = kk(i, i);
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        for t in 0..l {
            let (grad_diff, quad) = if t < n {
                if beta[t] <= 0.0 {
                    continue;
                }
                gmax2 = gmax2.max(grad[t]);
                (gmax + grad[t], qii + kk(t, t) - 2.0 * si * q(i, t))
            } else {
                if beta[t] >= c {
                    continue;
                }
                gmax2 = gmax2.max(-grad[t]);
                (gmax - grad[t], qii + kk(t, t) + 2.0 * si * q(i, t))
            };
            if grad_diff > 0.0 {
                let quad = if quad > 0.0 { quad } else { TAU };
                let obj = -(grad_diff * grad_diff) / quad;
                if obj <= best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax + gmax2 < params.tol {
            converged = true;
            break;
        }
        let Some(j) = j_sel else {
            converged = true;
            break;
        };
        iterations += 1;

        let (old_i, old_j) = (beta[i], beta[j]);
        let qij = q(i, j);
        if sign(i) != sign(j) {
            let quad = (qii + kk(j, j) + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if diff > 0.0 {
                if beta[j] < 0.0 {
                    beta[j] = 0.0;
                    beta[i] = diff;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = -diff;
            }
            if diff > 0.0 {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = c - diff;
                }
            } else if beta[j] > c {
                beta[j] = c;
                beta[i] = c + diff;
            }
        } else {
            let quad = (qii + kk(j, j) - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if sum > c {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = sum - c;
                }
            } else if beta[j] < 0.0 {
                beta[j] = 0.0;
                beta[i] = sum;
            }
            if sum > c {
                if beta[j] > c {
                    beta[j] = c;
                    beta[i] = sum - c;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = sum;
            }
        }
        let (di, dj) = (beta[i] - old_i, beta[j] - old_j);
        if di != 0.0 || dj != 0.0 {
            for t in 0..l {
                grad[t] += q(i, t) * di + q(j, t) * dj;
            }
        }
    }

    // Offset from free variables, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut n_free, mut sum_free) = (0usize, 0.0);
    for t in 0..l {
        let yg = sign(t) * grad[t];
        if beta[t] >= c {
            if sign(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if beta[t] <= 0.0 {
            if sign(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    let objective = 0.5 * (0..l).map(|t| beta[t] * (grad[t] + p[t])).sum::<f64>();
    Ok(SvrSolution {
        beta,
        rho,
        converged,
        iterations,
        objective,
    })
}

impl SvrModel {
    pub fn fit(x: &Matrix, y: &[f64], params: &SvrParams) -> Result<Self> {
        let sol = solve_dual(x, y, params)?;
        let n = x.rows();
        let mut sv_rows = Vec::new();
        let mut dual_coef = Vec::new();
        for i in 0..n {
            let coef = sol.beta[i] - sol.beta[i + n];
            if coef != 0.0 {
                sv_rows.push(i);
                dual_coef.push(coef);
            }
        }
        Ok(Self {
            kernel: params.kernel,
            support_vectors: x.select_rows(&sv_rows),
            dual_coef,
            rho: sol.rho,
            converged: sol.converged,
            iterations: sol.iterations,
            dual_objective: sol.objective,
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.support_vectors
            .iter_rows()
            .zip(&self.dual_coef)
            .map(|(sv, c)| c * self.kernel.eval(sv, row))
            .sum::<f64>()
            - self.rho
    }
}

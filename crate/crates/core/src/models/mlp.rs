//! Fully connected ReLU network with a linear output, trained with Adam on
//! half mean squared error.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub hidden_layer_sizes: Vec<usize>,
    pub learning_rate_init: f64,
    /// Maximum number of epochs.
    pub max_iter: usize,
    pub seed: u64,
    pub early_stopping: bool,
    pub batch_size: usize,
    pub validation_fraction: f64,
    pub n_iter_no_change: usize,
    /// Relative improvement below which an epoch counts as stalled.
    pub tol: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
}

impl MlpParams {
    pub fn new(hidden_layer_sizes: Vec<usize>, learning_rate_init: f64, max_iter: usize) -> Self {
        Self {
            hidden_layer_sizes,
            learning_rate_init,
            max_iter,
            seed: 0,
            early_stopping: true,
            batch_size: 32,
            validation_fraction: 0.1,
            n_iter_no_change: 10,
            tol: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// Row-major `outputs x inputs`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub epochs_run: usize,
    pub best_validation_loss: Option<f64>,
}

/// Layer widths from input to output.
fn widths(n_features: usize, hidden: &[usize]) -> Vec<usize> {
    let mut w = vec![n_features];
    w.extend_from_slice(hidden);
    w.push(1);
    w
}

impl Mlp {
    /// Glorot-uniform weights and biases (bound `sqrt(6 / (fan_in + fan_out))`).
    pub fn init<R: Rng + ?Sized>(n_features: usize, hidden: &[usize], rng: &mut R) -> Self {
        let w = widths(n_features, hidden);
        let layers = w
            .windows(2)
            .map(|io| {
                let (inputs, outputs) = (io[0], io[1]);
                let bound = libm::sqrt(6.0 / (inputs + outputs) as f64);
                let mut draw = || rng.random_range(-bound..bound);
                Dense {
                    inputs,
                    outputs,
                    weights: (0..inputs * outputs).map(|_| draw()).collect(),
                    bias: (0..outputs).map(|_| draw()).collect(),
                }
            })
            .collect();
        Self {
            layers,
            epochs_run: 0,
            best_validation_loss: None,
        }
    }

    /// Network of the given shape with every parameter zero.
    pub fn zeros(n_features: usize, hidden: &[usize]) -> Self {
        let w = widths(n_features, hidden);
        let layers = w
            .windows(2)
            .map(|io| Dense {
                inputs: io[0],
                outputs: io[1],
                weights: vec![0.0; io[0] * io[1]],
                bias: vec![0.0; io[1]],
            })
            .collect();
        Self {
            layers,
            epochs_run: 0,
            best_validation_loss: None,
        }
    }

    pub fn n_features(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn n_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters, layer by layer, weights before biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_parameters());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_parameters() {
            return Err(Error::LengthMismatch(alloc::format!(
                "{} parameters for a network with {}",
                params.len(),
                self.n_parameters()
            )));
        }
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    /// Activations of every layer for one input; the last entry is the output.
    fn forward(&self, row: &[f64]) -> Vec<Vec<f64>> {
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        acts.push(row.to_vec());
        let last = self.layers.len() - 1;
        for (k, l) in self.layers.iter().enumerate() {
            let input = &acts[k];
            let mut out = l.bias.clone();
            for (o, slot) in out.iter_mut().enumerate() {
                let w = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                *slot += w.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                if k != last && *slot < 0.0 {
                    *slot = 0.0;
                }
            }
            acts.push(out);
        }
        acts
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.forward(row).last().unwrap()[0]
    }

    /// Half mean squared error over `rows` and its gradient, flattened in
    /// [`parameters`](Self::parameters) order.
    pub fn loss_gradient(&self, x: &Matrix, y: &[f64], rows: &[usize]) -> (f64, Vec<f64>) {
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]))
            .collect();
        let m = rows.len() as f64;
        let mut loss = 0.0;
        for &r in rows {
            let acts = self.forward(x.row(r));
            let out = acts.last().unwrap()[0];
            let err = out - y[r];
            loss += 0.5 * err * err;
            let mut delta = vec![err / m];
            for k in (0..self.layers.len()).rev() {
                let l = &self.layers[k];
                let input = &acts[k];
                let (gw, gb) = &mut grads[k];
                for (o, d) in delta.iter().enumerate() {
                    gb[o] += d;
                    let row_w = &mut gw[o * l.inputs..(o + 1) * l.inputs];
                    for (g, a) in row_w.iter_mut().zip(input) {
                        *g += d * a;
                    }
                }
                if k > 0 {
                    let mut prev = vec![0.0; l.inputs];
                    for (o, d) in delta.iter().enumerate() {
                        let w = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                        for (p, wv) in prev.iter_mut().zip(w) {
                            *p += d * wv;
                        }
                    }
                    // ReLU derivative, taken as 0 at the kink.
                    for (p, a) in prev.iter_mut().zip(input) {
                        if *a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        let mut flat = Vec::with_capacity(self.n_parameters());
        for (gw, gb) in grads {
            flat.extend(gw);
            flat.extend(gb);
        }
        (loss / m, flat)
    }

    fn mean_loss(&self, x: &Matrix, y: &[f64], rows: &[usize]) -> f64 {
        rows.iter()
            .map(|&r| {
                let e = self.predict_row(x.row(r)) - y[r];
                0.5 * e * e
            })
            .sum::<f64>()
            / rows.len() as f64
    }

    pub fn fit(x: &Matrix, y: &[f64], params: &MlpParams) -> Result<Self> {
        let n = x.rows();
        if n == 0 || y.len() != n {
            return Err(Error::LengthMismatch(alloc::format!("mlp: {n} rows vs {} targets", y.len())));
        }
        if params.hidden_layer_sizes.contains(&0) {
            return Err(Error::Hyperparameter("hidden layer widths must be >= 1".into()));
        }
        if !(params.learning_rate_init > 0.0) || params.batch_size == 0 {
            return Err(Error::Hyperparameter("learning_rate_init and batch_size must be positive".into()));
        }
        let mut rng = rng_from_seed(params.seed);
        let mut net = Self::init(x.cols(), &params.hidden_layer_sizes, &mut rng);

        // Validation is the chronological tail.
        let n_val = if params.early_stopping && n >= 2 {
            (libm::ceil(params.validation_fraction * n as f64) as usize).clamp(1, n - 1)
        } else {
            0
        };
        let mut train: Vec<usize> = (0..n - n_val).collect();
        let val: Vec<usize> = (n - n_val..n).collect();

        let n_params = net.n_parameters();
        let mut m1 = vec![0.0; n_params];
        let mut m2 = vec![0.0; n_params];
        let mut theta = net.parameters();
        let mut step = 0i32;
        let mut best_score = f64::INFINITY;
        let mut best_theta = theta.clone();
        let mut stalled = 0usize;
        let mut last_loss = f64::NAN;

        for epoch in 0..params.max_iter {
            train.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for batch in train.chunks(params.batch_size) {
                let (loss, grad) = net.loss_gradient(x, y, batch);
                if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    return Err(Error::NonFiniteLoss { epoch, last_loss });
                }
                epoch_loss += loss * batch.len() as f64;
                step += 1;
                let lr = params.learning_rate_init
                    * libm::sqrt(1.0 - libm::pow(params.beta2, f64::from(step)))
                    / (1.0 - libm::pow(params.beta1, f64::from(step)));
                for k in 0..n_params {
                    m1[k] = params.beta1 * m1[k] + (1.0 - params.beta1) * grad[k];
                    m2[k] = params.beta2 * m2[k] + (1.0 - params.beta2) * grad[k] * grad[k];
                    theta[k] -= lr * m1[k] / (libm::sqrt(m2[k]) + params.adam_epsilon);
                }
                net.set_parameters(&theta)?;
            }
            epoch_loss /= train.len() as f64;
            if !epoch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, last_loss });
            }
            last_loss = epoch_loss;
            net.epochs_run = epoch + 1;

            let score = if n_val > 0 {
                net.mean_loss(x, y, &val)
            } else {
                epoch_loss
            };
            if score < best_score * (1.0 - params.tol) {
                stalled = 0;
            } else {
                stalled += 1;
            }
            if score < best_score {
                best_score = score;
                best_theta.copy_from_slice(&theta);
            }
            if stalled >= params.n_iter_no_change {
                break;
            }
        }
        if n_val > 0 {
            net.set_parameters(&best_theta)?;
            net.best_validation_loss = Some(best_score);
        }
        Ok(net)
    }
}

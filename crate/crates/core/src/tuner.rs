//! Grid search scored by expanding-window cross-validation.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurizer::{fit_normalizer, transform, FeatureMatrix};
use crate::models::{fit, Family, HyperValue, ModelSpec, Predictor};
use crate::rng::derive_seed;

pub const DEFAULT_SPLITS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<HyperValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDefinition {
    pub family: Family,
    pub axes: Vec<Axis>,
}

fn axis(name: &str, values: Vec<HyperValue>) -> Axis {
    Axis {
        name: name.into(),
        values,
    }
}

fn ints(v: &[i64]) -> Vec<HyperValue> {
    v.iter().map(|&i| HyperValue::Int(i)).collect()
}

fn floats(v: &[f64]) -> Vec<HyperValue> {
    v.iter().map(|&f| HyperValue::Float(f)).collect()
}

fn texts(v: &[&str]) -> Vec<HyperValue> {
    v.iter().map(|&s| HyperValue::Text(s.into())).collect()
}

fn leaf_limits() -> Vec<HyperValue> {
    let mut v = ints(&[5, 10, 35]);
    v.push(HyperValue::None);
    v
}

impl GridDefinition {
    /// The published search space for `family`.
    pub fn standard(family: Family) -> Self {
        let axes = match family {
            Family::Mlp => vec![
                axis("max_iter", ints(&[250, 500, 1000])),
                axis("learning_rate_init", floats(&[0.01, 0.001])),
                axis(
                    "hidden_layer_sizes",
                    [10usize, 25, 50]
                        .iter()
                        .map(|&w| HyperValue::Layers(vec![w; 3]))
                        .chain([10usize, 25, 50].iter().map(|&w| HyperValue::Layers(vec![w; 5])))
                        .collect(),
                ),
                axis("early_stopping", vec![HyperValue::Bool(true)]),
            ],
            Family::XgbVariant => vec![
                axis("booster", texts(&["gbtree", "gblinear", "dart"])),
                axis("max_delta_step", ints(&[0, 1, 5])),
                axis("lambda", ints(&[1, 3, 5, 10, 50, 100])),
            ],
            Family::GradientBoosting => vec![
                axis("criterion", texts(&["friedman_mse"])),
                axis("n_estimators", ints(&[150])),
                axis("learning_rate", floats(&[0.001, 0.01, 0.1])),
                axis("max_depth", ints(&[3, 5, 10])),
                axis("max_leaf_nodes", leaf_limits()),
                axis("min_samples_leaf", ints(&[1, 3, 5])),
            ],
            Family::RandomForest => vec![
                axis("criterion", texts(&["squared_error", "poisson"])),
                axis("n_estimators", ints(&[150])),
                axis("max_leaf_nodes", leaf_limits()),
                axis("min_samples_leaf", ints(&[1, 3, 5])),
            ],
            Family::Svr => vec![
                axis("C", floats(&[0.001, 0.01, 0.1, 1.0])),
                axis("kernel", texts(&["linear", "rbf"])),
            ],
            Family::LinearRegression => Vec::new(),
        };
        Self { family, axes }
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Replace (or add) one axis.
    pub fn with_axis(mut self, name: &str, values: Vec<HyperValue>) -> Self {
        match self.axes.iter_mut().find(|a| a.name == name) {
            Some(a) => a.values = values,
            None => self.axes.push(axis(name, values)),
        }
        self
    }

    /// Cartesian product; the first axis varies slowest.
    pub fn expand(&self, seed: u64) -> Vec<ModelSpec> {
        let total = self.size();
        let mut out = Vec::with_capacity(total);
        for mut k in 0..total {
            let mut spec = ModelSpec::new(self.family).with_seed(seed);
            let mut picks = vec![0usize; self.axes.len()];
            for (slot, a) in picks.iter_mut().zip(&self.axes).rev() {
                *slot = k % a.values.len();
                k /= a.values.len();
            }
            for (a, &i) in self.axes.iter().zip(&picks) {
                spec.hyperparameters.insert(a.name.clone(), a.values[i].clone());
            }
            out.push(spec);
        }
        out
    }
}

pub fn expand_grid(family: Family) -> Vec<ModelSpec> {
    GridDefinition::standard(family).expand(0)
}

/// Half-open ranges: train on `0..train_end`, validate on `val_start..val_end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train_end: usize,
    pub val_start: usize,
    pub val_end: usize,
}

impl Fold {
    pub fn train(&self) -> Range<usize> {
        0..self.train_end
    }

    pub fn validation(&self) -> Range<usize> {
        self.val_start..self.val_end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub n_samples: usize,
    pub n_splits: usize,
    pub folds: Vec<Fold>,
}

/// `n_splits + 1` contiguous blocks, the first `n % (n_splits + 1)` one longer.
pub fn make_cv_plan(n_samples: usize, n_splits: usize) -> Result<CvPlan> {
    if n_splits == 0 {
        return Err(Error::InvalidConfig("n_splits must be >= 1".into()));
    }
    let blocks = n_splits + 1;
    if n_samples < blocks {
        return Err(Error::TooShort {
            what: "cross-validation samples",
            required: blocks,
            actual: n_samples,
        });
    }
    let (base, rem) = (n_samples / blocks, n_samples % blocks);
    let mut bounds = Vec::with_capacity(blocks + 1);
    bounds.push(0);
    for b in 0..blocks {
        let len = base + usize::from(b < rem);
        bounds.push(bounds[b] + len);
    }
    let folds = (0..n_splits)
        .map(|k| Fold {
            train_end: bounds[k + 1],
            val_start: bounds[k + 1],
            val_end: bounds[k + 2],
        })
        .collect();
    Ok(CvPlan {
        n_samples,
        n_splits,
        folds,
    })
}

pub fn mse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.is_empty() || y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch(format!(
            "mse of {} targets vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let sum: f64 = y_true.iter().zip(y_pred).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / y_true.len() as f64)
}

/// Seed used for fold `fold` of `family` (the final refit uses `fold = n_splits`).
pub fn fold_seed(root: u64, family: Family, fold: usize) -> u64 {
    derive_seed(root, &[family.index(), fold as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub fold_mse: Vec<f64>,
    pub mean_mse: f64,
}

/// Cross-validate one candidate on the raw (unnormalized) training samples.
pub fn evaluate_candidate(
    spec: &ModelSpec,
    raw: &FeatureMatrix,
    plan: &CvPlan,
    root_seed: u64,
) -> Result<CandidateScore> {
    if plan.n_samples != raw.len() {
        return Err(Error::LengthMismatch(format!(
            "plan covers {} samples, matrix has {}",
            plan.n_samples,
            raw.len()
        )));
    }
    let mut fold_mse = Vec::with_capacity(plan.folds.len());
    for (k, fold) in plan.folds.iter().enumerate() {
        let norm = fit_normalizer(raw, fold.train())?;
        let train = transform(&raw.slice(fold.train()), &norm)?;
        let val = transform(&raw.slice(fold.validation()), &norm)?;
        let mut fold_spec = spec.clone();
        fold_spec.seed = fold_seed(root_seed, spec.family, k);
        let model = fit(&fold_spec, &train.x, &train.y)?;
        let pred = model.predict(&val.x)?;
        let score = mse(&val.y, &pred)?;
        if !score.is_finite() {
            return Err(Error::Hyperparameter(format!("non-finite validation MSE on fold {k}")));
        }
        fold_mse.push(score);
    }
    let mean_mse = fold_mse.iter().sum::<f64>() / fold_mse.len() as f64;
    Ok(CandidateScore { fold_mse, mean_mse })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    /// 1-based position in the sorted table.
    pub rank: usize,
    /// Position in grid enumeration order.
    pub grid_index: usize,
    pub spec: ModelSpec,
    pub fold_mse: Vec<f64>,
    pub mean_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCandidate {
    pub grid_index: usize,
    pub spec: ModelSpec,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub family: Family,
    pub n_candidates: usize,
    /// Ascending by mean MSE; equal scores keep grid order.
    pub table: Vec<ScoreEntry>,
    pub failed: Vec<FailedCandidate>,
}

impl TuneResult {
    /// Assemble from per-candidate outcomes given in grid order.
    pub fn from_scores(
        family: Family,
        candidates: &[ModelSpec],
        outcomes: Vec<Result<CandidateScore>>,
    ) -> Result<Self> {
        if candidates.len() != outcomes.len() {
            return Err(Error::LengthMismatch(format!(
                "{} candidates vs {} outcomes",
                candidates.len(),
                outcomes.len()
            )));
        }
        let mut table = Vec::new();
        let mut failed = Vec::new();
        for (i, (spec, outcome)) in candidates.iter().zip(outcomes).enumerate() {
            match outcome {
                Ok(s) => table.push(ScoreEntry {
                    rank: 0,
                    grid_index: i,
                    spec: spec.clone(),
                    fold_mse: s.fold_mse,
                    mean_mse: s.mean_mse,
                }),
                Err(e) => failed.push(FailedCandidate {
                    grid_index: i,
                    spec: spec.clone(),
                    error: e.to_string(),
                }),
            }
        }
        if table.is_empty() {
            return Err(Error::AllCandidatesFailed(failed.len()));
        }
        table.sort_by(|a, b| a.mean_mse.total_cmp(&b.mean_mse));
        for (r, e) in table.iter_mut().enumerate() {
            e.rank = r + 1;
        }
        Ok(Self {
            family,
            n_candidates: candidates.len(),
            table,
            failed,
        })
    }

    pub fn best(&self) -> &ScoreEntry {
        &self.table[0]
    }

    /// Best entry per model label, in table order (splits SVR by kernel).
    pub fn best_per_label(&self) -> Vec<&ScoreEntry> {
        let mut seen: Vec<String> = Vec::new();
        let mut out = Vec::new();
        for e in &self.table {
            let label = e.spec.label();
            if !seen.contains(&label) {
                seen.push(label);
                out.push(e);
            }
        }
        out
    }
}

/// Sequential search over `candidates`.
pub fn tune_candidates(
    family: Family,
    candidates: &[ModelSpec],
    raw: &FeatureMatrix,
    plan: &CvPlan,
    root_seed: u64,
) -> Result<TuneResult> {
    let outcomes = candidates
        .iter()
        .map(|c| evaluate_candidate(c, raw, plan, root_seed))
        .collect();
    TuneResult::from_scores(family, candidates, outcomes)
}

/// Search the published grid for `family`.
pub fn tune(family: Family, raw: &FeatureMatrix, plan: &CvPlan, root_seed: u64) -> Result<TuneResult> {
    let candidates = GridDefinition::standard(family).expand(fold_seed(root_seed, family, plan.n_splits));
    tune_candidates(family, &candidates, raw, plan, root_seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let sizes: Vec<(Family, usize)> = Family::ALL
            .iter()
            .map(|&f| (f, GridDefinition::standard(f).expand(0).len()))
            .collect();
        assert_eq!(
            sizes,
            vec![
                (Family::Mlp, 36),
                (Family::XgbVariant, 54),
                (Family::GradientBoosting, 108),
                (Family::RandomForest, 24),
                (Family::Svr, 8),
                (Family::LinearRegression, 1),
            ]
        );
        assert!(expand_grid(Family::LinearRegression)[0].hyperparameters.is_empty());
    }

    #[test]
    fn first_axis_is_outermost() {
        let g = expand_grid(Family::Svr);
        let pairs: Vec<String> = g.iter().map(|s| s.describe()).collect();
        assert_eq!(pairs[0], "C=0.001, kernel=linear");
        assert_eq!(pairs[1], "C=0.001, kernel=rbf");
        assert_eq!(pairs[7], "C=1, kernel=rbf");
    }

    #[test]
    fn cv_plan_examples() {
        let p = make_cv_plan(8, 3).unwrap();
        let folds: Vec<(usize, usize, usize)> =
            p.folds.iter().map(|f| (f.train_end, f.val_start, f.val_end)).collect();
        assert_eq!(folds, vec![(2, 2, 4), (4, 4, 6), (6, 6, 8)]);
        let p = make_cv_plan(4, 3).unwrap();
        let trains: Vec<usize> = p.folds.iter().map(|f| f.train_end).collect();
        assert_eq!(trains, vec![1, 2, 3]);
        let p = make_cv_plan(10, 3).unwrap();
        let folds: Vec<(usize, usize)> = p.folds.iter().map(|f| (f.train_end, f.val_end)).collect();
        assert_eq!(folds, vec![(3, 6), (6, 8), (8, 10)]);
        assert!(make_cv_plan(3, 3).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn failures_are_counted_and_ties_keep_grid_order() {
        let cands = expand_grid(Family::Svr);
        let outcomes: Vec<Result<CandidateScore>> = (0..cands.len())
            .map(|i| {
                if i == 0 {
                    Err(Error::Hyperparameter("boom".into()))
                } else {
                    Ok(CandidateScore {
                        fold_mse: vec![1.0],
                        mean_mse: if i >= 5 { 0.5 } else { 1.0 },
                    })
                }
            })
            .collect();
        let r = TuneResult::from_scores(Family::Svr, &cands, outcomes).unwrap();
        assert_eq!(r.failed.len(), 1);
        assert_eq!(r.best().grid_index, 5);
        assert_eq!(r.table.len(), 7);
        let labels: Vec<String> = r.best_per_label().iter().map(|e| e.spec.label()).collect();
        assert_eq!(labels, vec!["svr_rbf", "svr_linear"]);

        let all_bad = (0..2).map(|_| Err(Error::Hyperparameter("x".into()))).collect();
        assert_eq!(
            TuneResult::from_scores(Family::Svr, &cands[..2], all_bad).unwrap_err(),
            Error::AllCandidatesFailed(2)
        );
    }
}

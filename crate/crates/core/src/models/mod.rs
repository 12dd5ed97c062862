//! The six regressors behind one fit/predict surface.
//!
//! A [`ModelSpec`] names a family and a small map of hyperparameters; [`fit`]
//! validates the map against the family's vocabulary and returns a
//! [`TrainedModel`] that predicts normalized closes.

pub mod forest;
pub mod gbm;
pub mod linear;
pub mod mlp;
pub mod svr;
pub mod tree;
pub mod xgb;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use forest::{ForestCriterion, ForestParams, RandomForest};
use gbm::{BoostingParams, GradientBoosting};
use linear::LinearModel;
use mlp::{Mlp, MlpParams};
use svr::{Kernel, SvrModel, SvrParams};
use xgb::{BoosterKind, XgbModel, XgbParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    LinearRegression,
    Svr,
    RandomForest,
    GradientBoosting,
    XgbVariant,
    Mlp,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Mlp,
        Family::XgbVariant,
        Family::GradientBoosting,
        Family::RandomForest,
        Family::Svr,
        Family::LinearRegression,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::LinearRegression => "linear_regression",
            Family::Svr => "svr",
            Family::RandomForest => "random_forest",
            Family::GradientBoosting => "gradient_boosting",
            Family::XgbVariant => "xgb_variant",
            Family::Mlp => "mlp",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownFamily(name.into()))
    }

    /// Stable small integer used when deriving per-family seeds.
    pub fn index(&self) -> u64 {
        *self as u64
    }

    /// Hyperparameter names accepted by [`fit`].
    pub fn vocabulary(&self) -> &'static [&'static str] {
        match self {
            Family::LinearRegression => &[],
            Family::Svr => &["C", "kernel", "epsilon", "gamma", "tol", "max_iter"],
            Family::RandomForest => &[
                "criterion",
                "n_estimators",
                "max_leaf_nodes",
                "min_samples_leaf",
                "max_depth",
                "bootstrap",
            ],
            Family::GradientBoosting => &[
                "criterion",
                "n_estimators",
                "learning_rate",
                "max_depth",
                "max_leaf_nodes",
                "min_samples_leaf",
            ],
            Family::XgbVariant => &[
                "booster",
                "max_delta_step",
                "lambda",
                "n_rounds",
                "learning_rate",
                "max_depth",
                "rate_drop",
            ],
            Family::Mlp => &[
                "max_iter",
                "learning_rate_init",
                "hidden_layer_sizes",
                "early_stopping",
                "batch_size",
                "validation_fraction",
                "n_iter_no_change",
                "tol",
            ],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One hyperparameter value. `None` stands for "unlimited".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Layers(Vec<usize>),
}

impl fmt::Display for HyperValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperValue::None => f.write_str("None"),
            HyperValue::Bool(b) => write!(f, "{b}"),
            HyperValue::Int(i) => write!(f, "{i}"),
            HyperValue::Float(v) => write!(f, "{v}"),
            HyperValue::Text(s) => f.write_str(s),
            HyperValue::Layers(l) => {
                f.write_str("(")?;
                for (i, w) in l.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{w}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl From<i64> for HyperValue {
    fn from(v: i64) -> Self {
        HyperValue::Int(v)
    }
}

impl From<f64> for HyperValue {
    fn from(v: f64) -> Self {
        HyperValue::Float(v)
    }
}

impl From<&str> for HyperValue {
    fn from(v: &str) -> Self {
        HyperValue::Text(v.into())
    }
}

impl From<bool> for HyperValue {
    fn from(v: bool) -> Self {
        HyperValue::Bool(v)
    }
}

pub type Hyperparameters = BTreeMap<String, HyperValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub hyperparameters: Hyperparameters,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            hyperparameters: BTreeMap::new(),
            seed: 0,
        }
    }

    pub fn with(mut self, name: &str, value: impl Into<HyperValue>) -> Self {
        self.hyperparameters.insert(name.to_string(), value.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Family name, with the kernel appended for SVR (`svr_linear`, `svr_rbf`).
    pub fn label(&self) -> String {
        match (self.family, self.hyperparameters.get("kernel")) {
            (Family::Svr, Some(HyperValue::Text(k))) => format!("svr_{k}"),
            (Family::Svr, _) => "svr_rbf".into(),
            (f, _) => f.name().into(),
        }
    }

    /// `name=value` pairs in key order, or `defaults` when there are none.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .hyperparameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        if parts.is_empty() {
            return "defaults".into();
        }
        parts.join(", ")
    }

    /// Check names against the family vocabulary and decode every value.
    pub fn validate(&self) -> Result<()> {
        self.check_names()?;
        match self.family {
            Family::LinearRegression => Ok(()),
            Family::Svr => svr_params(self, 1).map(|_| ()),
            Family::RandomForest => forest_params(self).map(|_| ()),
            Family::GradientBoosting => boosting_params(self).map(|_| ()),
            Family::XgbVariant => xgb_params(self).map(|_| ()),
            Family::Mlp => mlp_params(self).map(|_| ()),
        }
    }

    fn check_names(&self) -> Result<()> {
        let vocab = self.family.vocabulary();
        for name in self.hyperparameters.keys() {
            if !vocab.contains(&name.as_str()) {
                return Err(Error::Hyperparameter(format!(
                    "{} does not take `{name}`",
                    self.family
                )));
            }
        }
        Ok(())
    }

    fn get(&self, name: &str) -> Option<&HyperValue> {
        self.hyperparameters.get(name)
    }

    fn bad(&self, name: &str, want: &str) -> Error {
        Error::Hyperparameter(format!(
            "{}: `{name}` must be {want}, got {}",
            self.family,
            self.get(name).map_or_else(|| "nothing".into(), |v| v.to_string())
        ))
    }

    fn float(&self, name: &str, default: f64) -> Result<f64> {
        match self.get(name) {
            None => Ok(default),
            Some(HyperValue::Float(v)) => Ok(*v),
            Some(HyperValue::Int(v)) => Ok(*v as f64),
            Some(_) => Err(self.bad(name, "a number")),
        }
    }

    fn count(&self, name: &str, default: usize) -> Result<usize> {
        match self.get(name) {
            None => Ok(default),
            Some(HyperValue::Int(v)) if *v >= 0 => Ok(*v as usize),
            Some(_) => Err(self.bad(name, "a nonnegative integer")),
        }
    }

    fn limit(&self, name: &str, default: Option<usize>) -> Result<Option<usize>> {
        match self.get(name) {
            None => Ok(default),
            Some(HyperValue::None) => Ok(None),
            Some(HyperValue::Int(v)) if *v >= 0 => Ok(Some(*v as usize)),
            Some(_) => Err(self.bad(name, "a nonnegative integer or None")),
        }
    }

    fn flag(&self, name: &str, default: bool) -> Result<bool> {
        match self.get(name) {
            None => Ok(default),
            Some(HyperValue::Bool(b)) => Ok(*b),
            Some(_) => Err(self.bad(name, "true or false")),
        }
    }

    fn text(&self, name: &str, default: &'static str) -> Result<&str> {
        match self.get(name) {
            None => Ok(default),
            Some(HyperValue::Text(s)) => Ok(s),
            Some(_) => Err(self.bad(name, "a string")),
        }
    }
}

fn svr_params(spec: &ModelSpec, n_features: usize) -> Result<SvrParams> {
    spec.check_names()?;
    let gamma_default = 1.0 / n_features.max(1) as f64;
    let kernel = match spec.text("kernel", "rbf")? {
        "linear" => Kernel::Linear,
        "rbf" => Kernel::Rbf {
            gamma: spec.float("gamma", gamma_default)?,
        },
        _ => return Err(spec.bad("kernel", "`linear` or `rbf`")),
    };
    let mut p = SvrParams::new(spec.float("C", 1.0)?, kernel);
    p.epsilon = spec.float("epsilon", p.epsilon)?;
    p.tol = spec.float("tol", p.tol)?;
    p.max_iter = spec.limit("max_iter", None)?;
    if !(p.c > 0.0) || !(p.epsilon >= 0.0) {
        return Err(spec.bad("C", "> 0 with epsilon >= 0"));
    }
    Ok(p)
}

fn forest_params(spec: &ModelSpec) -> Result<ForestParams> {
    spec.check_names()?;
    let d = ForestParams::default();
    let criterion = match spec.text("criterion", "squared_error")? {
        "squared_error" => ForestCriterion::SquaredError,
        "poisson" => ForestCriterion::Poisson,
        _ => return Err(spec.bad("criterion", "`squared_error` or `poisson`")),
    };
    Ok(ForestParams {
        criterion,
        n_estimators: spec.count("n_estimators", d.n_estimators)?,
        max_leaf_nodes: spec.limit("max_leaf_nodes", d.max_leaf_nodes)?,
        min_samples_leaf: spec.count("min_samples_leaf", d.min_samples_leaf)?.max(1),
        max_depth: spec.limit("max_depth", d.max_depth)?,
        bootstrap: spec.flag("bootstrap", true)?,
        seed: spec.seed,
    })
}

fn boosting_params(spec: &ModelSpec) -> Result<BoostingParams> {
    spec.check_names()?;
    if spec.text("criterion", "friedman_mse")? != "friedman_mse" {
        return Err(spec.bad("criterion", "`friedman_mse`"));
    }
    Ok(BoostingParams {
        learning_rate: spec.float("learning_rate", 0.1)?,
        n_estimators: spec.count("n_estimators", 100)?,
        max_depth: spec.limit("max_depth", Some(3))?,
        max_leaf_nodes: spec.limit("max_leaf_nodes", None)?,
        min_samples_leaf: spec.count("min_samples_leaf", 1)?.max(1),
    })
}

fn xgb_params(spec: &ModelSpec) -> Result<XgbParams> {
    spec.check_names()?;
    let mut p = XgbParams::new(BoosterKind::parse(spec.text("booster", "gbtree")?)?);
    p.lambda = spec.float("lambda", p.lambda)?;
    p.max_delta_step = spec.float("max_delta_step", p.max_delta_step)?;
    p.n_rounds = spec.count("n_rounds", p.n_rounds)?;
    p.learning_rate = spec.float("learning_rate", p.learning_rate)?;
    p.max_depth = spec.count("max_depth", p.max_depth)?;
    p.rate_drop = spec.float("rate_drop", p.rate_drop)?;
    p.seed = spec.seed;
    Ok(p)
}

fn mlp_params(spec: &ModelSpec) -> Result<MlpParams> {
    spec.check_names()?;
    let layers = match spec.get("hidden_layer_sizes") {
        None => alloc::vec![100],
        Some(HyperValue::Layers(l)) => l.clone(),
        Some(HyperValue::Int(w)) if *w > 0 => alloc::vec![*w as usize],
        Some(_) => return Err(spec.bad("hidden_layer_sizes", "a list of widths")),
    };
    let mut p = MlpParams::new(
        layers,
        spec.float("learning_rate_init", 0.001)?,
        spec.count("max_iter", 200)?,
    );
    p.early_stopping = spec.flag("early_stopping", true)?;
    p.batch_size = spec.count("batch_size", p.batch_size)?;
    p.validation_fraction = spec.float("validation_fraction", p.validation_fraction)?;
    p.n_iter_no_change = spec.count("n_iter_no_change", p.n_iter_no_change)?;
    p.tol = spec.float("tol", p.tol)?;
    p.seed = spec.seed;
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "model")]
pub enum LearnedParams {
    LinearRegression(LinearModel),
    Svr(SvrModel),
    RandomForest(RandomForest),
    GradientBoosting(GradientBoosting),
    XgbVariant(XgbModel),
    Mlp(Mlp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub n_samples: usize,
    pub n_features: usize,
    pub seed: u64,
    pub converged: bool,
    /// Solver iterations, boosting rounds or epochs, depending on the family.
    pub iterations: usize,
    /// Filled in by callers that have a clock.
    pub wall_time_secs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub params: LearnedParams,
    pub meta: TrainingMeta,
}

pub trait Predictor {
    fn n_features(&self) -> usize;

    /// Prediction for one row of the expected width.
    fn predict_row(&self, row: &[f64]) -> f64;

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.n_features() {
            return Err(Error::WidthMismatch {
                expected: self.n_features(),
                actual: x.cols(),
            });
        }
        Ok(x.iter_rows().map(|r| self.predict_row(r)).collect())
    }
}

impl Predictor for TrainedModel {
    fn n_features(&self) -> usize {
        self.meta.n_features
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.params {
            LearnedParams::LinearRegression(m) => m.predict_row(row),
            LearnedParams::Svr(m) => m.predict_row(row),
            LearnedParams::RandomForest(m) => m.predict_row(row),
            LearnedParams::GradientBoosting(m) => m.predict_row(row),
            LearnedParams::XgbVariant(m) => m.predict_row(row),
            LearnedParams::Mlp(m) => m.predict_row(row),
        }
    }
}

/// Train `spec` on `x`, `y`.
pub fn fit(spec: &ModelSpec, x: &Matrix, y: &[f64]) -> Result<TrainedModel> {
    if x.rows() == 0 || y.len() != x.rows() {
        return Err(Error::LengthMismatch(format!(
            "{} rows vs {} targets",
            x.rows(),
            y.len()
        )));
    }
    let (params, converged, iterations) = match spec.family {
        Family::LinearRegression => {
            spec.check_names()?;
            (LearnedParams::LinearRegression(LinearModel::fit(x, y)?), true, 1)
        }
        Family::Svr => {
            let m = SvrModel::fit(x, y, &svr_params(spec, x.cols())?)?;
            let (c, it) = (m.converged, m.iterations);
            (LearnedParams::Svr(m), c, it)
        }
        Family::RandomForest => {
            let p = forest_params(spec)?;
            let m = RandomForest::fit(x, y, &p)?;
            (LearnedParams::RandomForest(m), true, p.n_estimators)
        }
        Family::GradientBoosting => {
            let p = boosting_params(spec)?;
            let m = GradientBoosting::fit(x, y, &p)?;
            (LearnedParams::GradientBoosting(m), true, p.n_estimators)
        }
        Family::XgbVariant => {
            let p = xgb_params(spec)?;
            let m = XgbModel::fit(x, y, &p)?;
            (LearnedParams::XgbVariant(m), true, p.n_rounds)
        }
        Family::Mlp => {
            let p = mlp_params(spec)?;
            let m = Mlp::fit(x, y, &p)?;
            let converged = m.epochs_run < p.max_iter;
            let it = m.epochs_run;
            (LearnedParams::Mlp(m), converged, it)
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        params,
        meta: TrainingMeta {
            n_samples: x.rows(),
            n_features: x.cols(),
            seed: spec.seed,
            converged,
            iterations,
            wall_time_secs: None,
        },
    })
}

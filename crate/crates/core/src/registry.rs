//! Learners selectable by name.
//!
//! Each training strategy implements [`Learner`]; the [`LearnerRegistry`]
//! maps a name (`svm`, `perceptron`, `svr`) to a factory that builds the
//! learner from [`LearnerOptions`]. Cross-validation, the CLI and the
//! benchmarks only ever see `dyn Learner` / `dyn Model`.

use std::collections::BTreeMap;

use crate::eval::{fit_folds, metrics_from_cm, EvalError};
use crate::features::Dataset;
use crate::learn::{
    train_perceptron, train_svm, train_svr, LearnError, Model, PerceptronParams, SvmParams,
    SvrParams, DEFAULT_C, DEFAULT_MAX_EPOCHS, DEFAULT_SVR_EPSILON,
};

/// A training strategy producing a [`Model`].
pub trait Learner: Send + Sync {
    fn name(&self) -> &str;
    /// Effective hyperparameters, for report headers.
    fn describe(&self) -> String;
    fn fit(&self, train: &Dataset, seed: u64) -> Result<Box<dyn Model>, EvalError>;
}

/// Hyperparameters shared by every factory; each learner reads the fields it
/// needs.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerOptions {
    pub c: f64,
    /// `None` means `1 / feature_count`, resolved at fit time.
    pub gamma: Option<f64>,
    pub epsilon: f64,
    pub balanced: bool,
    pub max_epochs: usize,
    pub grid_search: bool,
    /// Folds used by the inner grid-search cross-validation.
    pub inner_k: usize,
}

impl Default for LearnerOptions {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            gamma: None,
            epsilon: DEFAULT_SVR_EPSILON,
            balanced: true,
            max_epochs: DEFAULT_MAX_EPOCHS,
            grid_search: false,
            inner_k: 4,
        }
    }
}

fn resolve_gamma(gamma: Option<f64>, ds: &Dataset) -> f64 {
    gamma.unwrap_or_else(|| 1.0 / ds.dims().max(1) as f64)
}

fn fmt_gamma(g: Option<f64>) -> String {
    g.map_or_else(|| "1/dims".to_string(), |g| g.to_string())
}

pub struct SvmLearner {
    pub c: f64,
    pub gamma: Option<f64>,
    pub balanced: bool,
}

impl Learner for SvmLearner {
    fn name(&self) -> &str {
        "svm"
    }
    fn describe(&self) -> String {
        format!(
            "svm C={} gamma={} balanced={}",
            self.c,
            fmt_gamma(self.gamma),
            self.balanced
        )
    }
    fn fit(&self, train: &Dataset, _seed: u64) -> Result<Box<dyn Model>, EvalError> {
        let params = SvmParams::new(self.c, resolve_gamma(self.gamma, train), self.balanced);
        Ok(Box::new(train_svm(train, &params)?))
    }
}

pub struct PerceptronLearner {
    pub params: PerceptronParams,
}

impl Learner for PerceptronLearner {
    fn name(&self) -> &str {
        "perceptron"
    }
    fn describe(&self) -> String {
        format!(
            "perceptron max_epochs={} balanced={}",
            self.params.max_epochs, self.params.balanced
        )
    }
    fn fit(&self, train: &Dataset, seed: u64) -> Result<Box<dyn Model>, EvalError> {
        Ok(Box::new(train_perceptron(train, &self.params, seed)?))
    }
}

pub struct SvrLearner {
    pub c: f64,
    pub gamma: Option<f64>,
    pub epsilon: f64,
}

impl Learner for SvrLearner {
    fn name(&self) -> &str {
        "svr"
    }
    fn describe(&self) -> String {
        format!(
            "svr C={} gamma={} epsilon={}",
            self.c,
            fmt_gamma(self.gamma),
            self.epsilon
        )
    }
    fn fit(&self, train: &Dataset, _seed: u64) -> Result<Box<dyn Model>, EvalError> {
        let params = SvrParams::new(self.c, resolve_gamma(self.gamma, train), self.epsilon);
        Ok(Box::new(train_svr(train, &params)?))
    }
}

/// Candidate box constraints for the SVM grid search.
pub const GRID_C: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

/// Candidate RBF widths; `None` stands for `1 / feature_count`.
pub const GRID_GAMMA: [Option<f64>; 4] = [Some(0.001), Some(0.005), None, Some(0.05)];

/// SVM whose `(C, gamma)` is chosen by an inner stratified cross-validation
/// on the training data only, maximizing mean F-measure (undefined folds
/// count as 0). Ties keep the first candidate in grid order.
pub struct GridSearchSvm {
    pub balanced: bool,
    pub inner_k: usize,
}

impl GridSearchSvm {
    /// Returns the selected `(C, gamma)` and its mean inner F-measure.
    pub fn select(&self, train: &Dataset, seed: u64) -> Result<(f64, f64, f64), EvalError> {
        let mut best: Option<(f64, f64, f64)> = None;
        for &c in &GRID_C {
            for &g in &GRID_GAMMA {
                let gamma = resolve_gamma(g, train);
                let candidate = SvmLearner {
                    c,
                    gamma: Some(gamma),
                    balanced: self.balanced,
                };
                let folds = fit_folds(train, &candidate, self.inner_k, seed, 1)?;
                let mean_f = folds
                    .iter()
                    .map(|f| metrics_from_cm(&f.confusion).f_measure.unwrap_or(0.0))
                    .sum::<f64>()
                    / folds.len() as f64;
                if best.map_or(true, |(_, _, f)| mean_f > f) {
                    best = Some((c, gamma, mean_f));
                }
            }
        }
        Ok(best.expect("grid is non-empty"))
    }
}

impl Learner for GridSearchSvm {
    fn name(&self) -> &str {
        "svm"
    }
    fn describe(&self) -> String {
        format!(
            "svm grid_search C={:?} gamma={{0.001,0.005,1/dims,0.05}} inner_k={} balanced={}",
            GRID_C, self.inner_k, self.balanced
        )
    }
    fn fit(&self, train: &Dataset, seed: u64) -> Result<Box<dyn Model>, EvalError> {
        let (c, gamma, _) = self.select(train, seed)?;
        let params = SvmParams::new(c, gamma, self.balanced);
        Ok(Box::new(train_svm(train, &params)?))
    }
}

pub type LearnerFactory = fn(&LearnerOptions) -> Result<Box<dyn Learner>, LearnError>;

/// Name -> factory map of training strategies.
pub struct LearnerRegistry {
    factories: BTreeMap<String, LearnerFactory>,
}

impl LearnerRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// Registry with `svm`, `perceptron` and `svr`.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("svm", |o| {
            if o.grid_search {
                Ok(Box::new(GridSearchSvm {
                    balanced: o.balanced,
                    inner_k: o.inner_k,
                }))
            } else {
                Ok(Box::new(SvmLearner {
                    c: o.c,
                    gamma: o.gamma,
                    balanced: o.balanced,
                }))
            }
        });
        r.register("perceptron", |o| {
            Ok(Box::new(PerceptronLearner {
                params: PerceptronParams {
                    max_epochs: o.max_epochs,
                    balanced: o.balanced,
                },
            }))
        });
        r.register("svr", |o| {
            Ok(Box::new(SvrLearner {
                c: o.c,
                gamma: o.gamma,
                epsilon: o.epsilon,
            }))
        });
        r
    }

    pub fn register(&mut self, name: &str, factory: LearnerFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn create(&self, name: &str, options: &LearnerOptions) -> Result<Box<dyn Learner>, LearnError> {
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| LearnError::UnknownLearner(name.to_string()))?;
        factory(options)
    }
}

impl Default for LearnerRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

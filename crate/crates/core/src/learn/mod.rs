//! From-scratch learners: RBF C-SVC and epsilon-SVR trained by SMO, plus a
//! class-balanced perceptron baseline.
//!
//! Every trained learner implements [`Model`], so callers (cross-validation,
//! the navigator, the CLI) can treat them interchangeably.

mod io;
mod kernel;
mod perceptron;
mod smo;
mod svm;
mod svr;

pub use io::{load_model, save_model, MODEL_VERSION};
pub use kernel::{rbf, KernelParams};
pub use perceptron::{
    perceptron_step, train_perceptron, PerceptronModel, PerceptronParams, DEFAULT_MAX_EPOCHS,
};
pub use smo::{SmoConfig, SmoSolution};
pub use svm::{
    class_weights, predict_svm, svm_kkt_violation, train_svm, train_svm_traced, SvmModel,
    SvmParams,
};
pub use svr::{
    classify_svr, svr_kkt_violation, train_svr, train_svr_traced, SvrModel, SvrParams,
};

use std::any::Any;
use std::fmt;

use thiserror::Error;

use crate::features::{FeatureError, Label};

/// Default box constraint for both support-vector learners.
pub const DEFAULT_C: f64 = 10.0;
/// Default SVR tube half-width in centimetres.
pub const DEFAULT_SVR_EPSILON: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("training data contains a single class")]
    SingleClass,
    #[error("hyperparameter {name} must be positive (got {value})")]
    NonPositiveHyperparameter { name: &'static str, value: f64 },
    #[error("vector length {found} does not match expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("sample {index} has no distance; regression needs a distance for every sample")]
    MissingDistance { index: usize },
    #[error("SMO did not converge after {iterations} iterations (KKT gap {violation:.3e})")]
    NonConvergence { iterations: usize, violation: f64 },
    #[error("unsupported model file version: {0}")]
    BadVersion(String),
    #[error("corrupt model file: {0}")]
    CorruptSection(String),
    #[error("unknown learner {0:?}")]
    UnknownLearner(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<(), LearnError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(LearnError::NonPositiveHyperparameter { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// Signed score; positive means obstacle.
    pub score: f64,
}

/// Solver state recorded at fit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    pub iterations: usize,
    /// KKT gap at termination.
    pub kkt_violation: f64,
    /// `sum y_i alpha_i` (SVC) or `sum (alpha_i - alpha*_i)` (SVR).
    pub equality_residual: f64,
    /// Minimized dual objective.
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Svm,
    Perceptron,
    Svr,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::Perceptron => "perceptron",
            ModelKind::Svr => "svr",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A trained binary obstacle classifier.
pub trait Model: Send + Sync + fmt::Debug {
    fn kind(&self) -> ModelKind;
    /// Expected raw feature length.
    fn dims(&self) -> usize;
    fn predict(&self, x: &[f64]) -> Result<Prediction, LearnError>;
    fn diagnostics(&self) -> Option<&FitDiagnostics> {
        None
    }
    fn as_any(&self) -> &dyn Any;
}

impl Model for SvmModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Svm
    }
    fn dims(&self) -> usize {
        self.scaler.dims()
    }
    fn predict(&self, x: &[f64]) -> Result<Prediction, LearnError> {
        predict_svm(self, x)
    }
    fn diagnostics(&self) -> Option<&FitDiagnostics> {
        self.diagnostics.as_ref()
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

impl Model for SvrModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Svr
    }
    fn dims(&self) -> usize {
        self.scaler.dims()
    }
    fn predict(&self, x: &[f64]) -> Result<Prediction, LearnError> {
        SvrModel::predict(self, x)
    }
    fn diagnostics(&self) -> Option<&FitDiagnostics> {
        self.diagnostics.as_ref()
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

impl Model for PerceptronModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Perceptron
    }
    fn dims(&self) -> usize {
        self.scaler.dims()
    }
    fn predict(&self, x: &[f64]) -> Result<Prediction, LearnError> {
        PerceptronModel::predict(self, x)
    }
    fn as_any(&self) -> &dyn Any {
        self
    }
}

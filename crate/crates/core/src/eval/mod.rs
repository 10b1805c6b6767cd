//! Off-line evaluation: stratified k-fold cross-validation, confusion-matrix
//! metrics and throughput benchmarks.

mod bench;
mod cv;
mod folds;
mod metrics;

pub use bench::{bench_full_cycle, bench_throughput, BenchReport, StageTiming};
pub use cv::{cross_validate, fit_folds, CvReport, FoldOutcome, MetricSummary};
pub use folds::{kfold_indices, DEFAULT_K};
pub use metrics::{metrics_from_cm, Cell, ConfusionMatrix, MetricName, Metrics};

use thiserror::Error;

use crate::features::{FeatureError, Label};
use crate::flow::FlowError;
use crate::imaging::ImageError;
use crate::learn::LearnError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("k must be at least 2 (got {0})")]
    InvalidK(usize),
    #[error("{samples} samples cannot fill {k} folds")]
    TooFewSamples { samples: usize, k: usize },
    #[error("class {label} has {count} samples, fewer than k={k}")]
    TooFewPerClass { label: Label, count: usize, k: usize },
    #[error("benchmark needs at least 2 frames (got {0})")]
    TooFewFrames(usize),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

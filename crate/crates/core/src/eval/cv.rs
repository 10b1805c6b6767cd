use std::fmt::Write as _;

use rayon::prelude::*;

use crate::features::Dataset;
use crate::learn::Model;
use crate::registry::Learner;
use crate::seed::derive_seed;

use super::metrics::{metrics_from_cm, Cell, ConfusionMatrix, MetricName, Metrics};
use super::{kfold_indices, EvalError};

/// Result of training on all folds but one and scoring the held-out fold.
#[derive(Debug)]
pub struct FoldOutcome {
    pub fold: usize,
    pub test_indices: Vec<usize>,
    pub model: Box<dyn Model>,
    pub confusion: ConfusionMatrix,
}

/// Mean and sample standard deviation of one metric over the folds where it
/// is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: Option<f64>,
    pub std: Option<f64>,
    /// Folds where the metric was undefined.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub learner: String,
    pub k: usize,
    pub seed: u64,
    pub confusions: Vec<ConfusionMatrix>,
    pub per_fold: Vec<Metrics>,
}

impl CvReport {
    pub fn summary(&self, name: MetricName) -> MetricSummary {
        let values: Vec<f64> = self.per_fold.iter().filter_map(|m| m.get(name)).collect();
        let excluded = self.per_fold.len() - values.len();
        if values.is_empty() {
            return MetricSummary {
                mean: None,
                std: None,
                excluded,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.len() > 1).then(|| {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        });
        MetricSummary {
            mean: Some(mean),
            std,
            excluded,
        }
    }

    pub fn mean(&self, name: MetricName) -> Option<f64> {
        self.summary(name).mean
    }

    /// Human-readable table: one row per fold, then `mean`, `std` and the
    /// count of undefined folds per metric.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "cross-validation: {} (k={}, seed={})", self.learner, self.k, self.seed);
        let _ = writeln!(
            out,
            "{:<6} {:>5} {:>5} {:>5} {:>5}  {:>10} {:>10} {:>10} {:>10}",
            "fold", "tp", "fp", "fn", "tn", "precision", "recall", "f_measure", "accuracy"
        );
        for (i, (cm, m)) in self.confusions.iter().zip(&self.per_fold).enumerate() {
            let _ = writeln!(
                out,
                "{:<6} {:>5} {:>5} {:>5} {:>5}  {:>10} {:>10} {:>10} {:>10}",
                i,
                cm.tp,
                cm.fp,
                cm.fn_,
                cm.tn,
                Cell(m.precision).to_string(),
                Cell(m.recall).to_string(),
                Cell(m.f_measure).to_string(),
                Cell(m.accuracy).to_string()
            );
        }
        let summaries: Vec<MetricSummary> = MetricName::ALL.iter().map(|n| self.summary(*n)).collect();
        let row = |label: &str, f: &dyn Fn(&MetricSummary) -> String| {
            let mut line = format!("{:<6} {:>5} {:>5} {:>5} {:>5} ", label, "", "", "", "");
            for s in &summaries {
                line.push_str(&format!(" {:>10}", f(s)));
            }
            line
        };
        let _ = writeln!(out, "{}", row("mean", &|s| Cell(s.mean).to_string()));
        let _ = writeln!(out, "{}", row("std", &|s| Cell(s.std).to_string()));
        let _ = writeln!(out, "{}", row("undef", &|s| s.excluded.to_string()));
        out
    }

    /// `fold,precision,recall,f_measure,accuracy` rows plus `mean` and `std`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fold,precision,recall,f_measure,accuracy\n");
        for (i, m) in self.per_fold.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i},{},{},{},{}",
                Cell(m.precision),
                Cell(m.recall),
                Cell(m.f_measure),
                Cell(m.accuracy)
            );
        }
        for (label, pick) in [
            ("mean", (|s: &MetricSummary| s.mean) as fn(&MetricSummary) -> Option<f64>),
            ("std", |s: &MetricSummary| s.std),
        ] {
            out.push_str(label);
            for n in MetricName::ALL {
                let _ = write!(out, ",{}", Cell(pick(&self.summary(n))));
            }
            out.push('\n');
        }
        out
    }
}

/// Trains and scores every fold. With `jobs > 1` folds run on a thread pool;
/// the outcome does not depend on `jobs`.
pub fn fit_folds(
    ds: &Dataset,
    learner: &dyn Learner,
    k: usize,
    seed: u64,
    jobs: usize,
) -> Result<Vec<FoldOutcome>, EvalError> {
    let folds = kfold_indices(&ds.labels(), k, seed)?;
    let run = |fold: usize| -> Result<FoldOutcome, EvalError> {
        let test = &folds[fold];
        let mut train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != fold)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        train.sort_unstable();
        let model = learner.fit(&ds.subset(&train), derive_seed(seed, fold as u64))?;
        let mut confusion = ConfusionMatrix::default();
        for &i in test {
            let s = &ds.samples()[i];
            confusion.record(s.label, model.predict(&s.features)?.label);
        }
        Ok(FoldOutcome {
            fold,
            test_indices: test.clone(),
            model,
            confusion,
        })
    };
    if jobs <= 1 {
        (0..k).map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| EvalError::ThreadPool(e.to_string()))?;
        pool.install(|| (0..k).into_par_iter().map(run).collect())
    }
}

/// Stratified k-fold cross-validation of `learner` on `ds`.
pub fn cross_validate(
    ds: &Dataset,
    learner: &dyn Learner,
    k: usize,
    seed: u64,
    jobs: usize,
) -> Result<CvReport, EvalError> {
    let outcomes = fit_folds(ds, learner, k, seed, jobs)?;
    let confusions: Vec<ConfusionMatrix> = outcomes.iter().map(|o| o.confusion).collect();
    Ok(CvReport {
        learner: learner.describe(),
        k,
        seed,
        per_fold: confusions.iter().map(metrics_from_cm).collect(),
        confusions,
    })
}

use std::fmt;

use crate::features::Label;

/// Confusion counts with `+1` (obstacle) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Positive, Label::Positive) => self.tp += 1,
            (Label::Negative, Label::Positive) => self.fp += 1,
            (Label::Positive, Label::Negative) => self.fn_ += 1,
            (Label::Negative, Label::Negative) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn + other.tn,
        }
    }
}

/// Precision, recall, F-measure and accuracy; `None` means undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_measure: Option<f64>,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricName {
    Precision,
    Recall,
    FMeasure,
    Accuracy,
}

impl MetricName {
    pub const ALL: [MetricName; 4] = [
        MetricName::Precision,
        MetricName::Recall,
        MetricName::FMeasure,
        MetricName::Accuracy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricName::Precision => "precision",
            MetricName::Recall => "recall",
            MetricName::FMeasure => "f_measure",
            MetricName::Accuracy => "accuracy",
        }
    }
}

impl Metrics {
    pub fn get(&self, name: MetricName) -> Option<f64> {
        match name {
            MetricName::Precision => self.precision,
            MetricName::Recall => self.recall,
            MetricName::FMeasure => self.f_measure,
            MetricName::Accuracy => self.accuracy,
        }
    }
}

pub fn metrics_from_cm(cm: &ConfusionMatrix) -> Metrics {
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f_measure = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Metrics {
        precision,
        recall,
        f_measure,
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
    }
}

/// Renders an optional metric as a fixed-precision number, or `-` when
/// undefined.
pub struct Cell(pub Option<f64>);

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => write!(f, "{v:.6}"),
            None => f.write_str("-"),
        }
    }
}

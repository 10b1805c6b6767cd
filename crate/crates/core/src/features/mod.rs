//! (amplitude, phase) descriptors, distance labels, feature scaling and the
//! dataset CSV format.

mod dataset;
mod scaler;

pub use dataset::{load_dataset, save_dataset, Dataset, LabeledSample, PatternMeta};
pub use scaler::{fit_scaler, MinMaxScaler};

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::flow::{FlowField, TrackStatus};

/// Default obstacle distance cutoff in centimetres.
pub const DEFAULT_THRESHOLD_CM: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("negative distance {0} cm")]
    NegativeDistance(f64),
    #[error("labeling threshold must be positive (got {0})")]
    BadThreshold(f64),
    #[error("cannot fit a scaler on an empty training set")]
    EmptyTraining,
    #[error("feature length {found} does not match expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("bad dataset header: {0}")]
    BadHeader(String),
    #[error("line {line}: row has {found} columns, header has {expected}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: label {value:?} is not -1 or +1")]
    BadLabel { line: usize, value: String },
    #[error("line {line}: bad number {value:?}")]
    BadNumber { line: usize, value: String },
    #[error("inconsistent dataset: {0}")]
    Inconsistent(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Binary class: `Positive` (+1) marks an obstacle on the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_sign(value: f64) -> Label {
        if value > 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s.trim() {
            "-1" => Some(Label::Negative),
            "1" | "+1" => Some(Label::Positive),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Negative => f.write_str("-1"),
            Label::Positive => f.write_str("+1"),
        }
    }
}

/// `[mag_0, phase_0, mag_1, phase_1, ...]` in pattern point order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-point magnitude and phase (radians in `(-pi, pi]`, 0 for a zero vector).
pub fn extract_features(field: &FlowField) -> FeatureVector {
    let mut values = Vec::with_capacity(2 * field.len());
    for (v, s) in field.vectors().iter().zip(field.status()) {
        if *s == TrackStatus::Lost {
            values.extend_from_slice(&[0.0, 0.0]);
            continue;
        }
        let mag = v[0].hypot(v[1]);
        let phase = if mag == 0.0 {
            0.0
        } else {
            let a = v[1].atan2(v[0]);
            if a <= -PI {
                PI
            } else {
                a
            }
        };
        values.push(mag);
        values.push(phase);
    }
    FeatureVector(values)
}

/// `+1` when the obstacle is at or inside `threshold` centimetres.
pub fn label_from_distance(distance: f64, threshold: f64) -> Result<Label, FeatureError> {
    if !(threshold > 0.0) {
        return Err(FeatureError::BadThreshold(threshold));
    }
    if distance < 0.0 || distance.is_nan() {
        return Err(FeatureError::NegativeDistance(distance));
    }
    Ok(if distance <= threshold {
        Label::Positive
    } else {
        Label::Negative
    })
}

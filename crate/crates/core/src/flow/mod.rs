//! Circular observation pattern and sparse pyramidal Lucas-Kanade flow.

mod lk;
mod pattern;

pub use lk::{lucas_kanade, lucas_kanade_with_work, LkParams};
pub use pattern::{
    generate_pattern, generate_pattern_with, SamplePattern, DEFAULT_GROWTH,
    DEFAULT_OUTER_FRACTION, DEFAULT_PER_RING, DEFAULT_RINGS,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("pattern point ({x:.2}, {y:.2}) lies outside the image")]
    PatternOutOfBounds { x: f64, y: f64 },
    #[error("frame sizes differ: prev {prev:?}, next {next:?}")]
    DimensionMismatch {
        prev: (usize, usize),
        next: (usize, usize),
    },
    #[error("invalid Lucas-Kanade parameters: {0}")]
    InvalidParams(String),
    #[error("flow field has {field} points, pattern has {pattern}")]
    PatternMismatch { field: usize, pattern: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrackStatus {
    Tracked,
    Lost,
}

impl TrackStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrackStatus::Tracked => "tracked",
            TrackStatus::Lost => "lost",
        }
    }
}

/// Per-point displacement `(u1, u2)` in pixels plus tracking status.
/// Lost points always carry `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    vectors: Vec<[f64; 2]>,
    status: Vec<TrackStatus>,
}

impl FlowField {
    /// Builds a field, zeroing the vector of every Lost point.
    pub fn from_parts(mut vectors: Vec<[f64; 2]>, status: Vec<TrackStatus>) -> Self {
        assert_eq!(vectors.len(), status.len(), "vectors/status length mismatch");
        for (v, s) in vectors.iter_mut().zip(&status) {
            if *s == TrackStatus::Lost {
                *v = [0.0, 0.0];
            }
        }
        Self { vectors, status }
    }

    pub fn vectors(&self) -> &[[f64; 2]] {
        &self.vectors
    }

    pub fn status(&self) -> &[TrackStatus] {
        &self.status
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn tracked_count(&self) -> usize {
        self.status.iter().filter(|s| **s == TrackStatus::Tracked).count()
    }

    /// Swaps the left and right halves of the field by mirroring about the
    /// pattern's vertical axis (u1 changes sign).
    pub fn mirrored(&self, pattern: &SamplePattern) -> Result<FlowField, FlowError> {
        self.check(pattern)?;
        let cx = pattern.center()[0];
        let pts = pattern.points();
        let mut vectors = vec![[0.0; 2]; self.len()];
        let mut status = vec![TrackStatus::Lost; self.len()];
        for (i, p) in pts.iter().enumerate() {
            let target = [2.0 * cx - p[0], p[1]];
            let j = pts
                .iter()
                .position(|q| (q[0] - target[0]).abs() < 1e-9 && (q[1] - target[1]).abs() < 1e-9)
                .ok_or_else(|| FlowError::InvalidPattern("pattern is not mirror symmetric".into()))?;
            vectors[j] = [-self.vectors[i][0], self.vectors[i][1]];
            status[j] = self.status[i];
        }
        Ok(FlowField::from_parts(vectors, status))
    }

    fn check(&self, pattern: &SamplePattern) -> Result<(), FlowError> {
        if self.len() != pattern.len() {
            return Err(FlowError::PatternMismatch {
                field: self.len(),
                pattern: pattern.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfSelector {
    All,
    LeftOfCenter,
    RightOfCenter,
}

/// Sum of tracked flow magnitudes over the selected half of the pattern.
/// Points exactly on the center column belong to neither half.
pub fn flow_intensity(
    field: &FlowField,
    selector: HalfSelector,
    pattern: &SamplePattern,
) -> Result<f64, FlowError> {
    field.check(pattern)?;
    let cx = pattern.center()[0];
    let total = pattern
        .points()
        .iter()
        .zip(field.vectors())
        .zip(field.status())
        .filter(|((p, _), s)| {
            **s == TrackStatus::Tracked
                && match selector {
                    HalfSelector::All => true,
                    HalfSelector::LeftOfCenter => p[0] < cx,
                    HalfSelector::RightOfCenter => p[0] > cx,
                }
        })
        .map(|((_, v), _)| v[0].hypot(v[1]))
        .sum();
    Ok(total)
}

//! Closed-loop work cycle: capture, flow, classify, steer away from the
//! side with more flow.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::features::{extract_features, label_from_distance, FeatureError, Label};
use crate::flow::{flow_intensity, lucas_kanade, FlowError, FlowField, HalfSelector, LkParams, SamplePattern};
use crate::imaging::{build_pyramid, GrayImage, ImageError};
use crate::learn::{LearnError, Model};
use crate::seed::derive_seed;
use crate::sim::{nearest_obstacle_distance, render, step, CameraPose, SimConfig, SimError, World};

#[derive(Debug, Error)]
pub enum NavError {
    #[error("max_steps must be at least 2 (got {0})")]
    TooFewSteps(usize),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NavDecision {
    Forward,
    Deflect(Side),
}

impl NavDecision {
    pub fn as_str(self) -> &'static str {
        match self {
            NavDecision::Forward => "forward",
            NavDecision::Deflect(Side::Left) => "left",
            NavDecision::Deflect(Side::Right) => "right",
        }
    }
}

impl fmt::Display for NavDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Anything that can say whether an obstacle is close.
pub trait ObstacleDetector {
    /// `distance` is the ground-truth range, which only an oracle may use.
    fn detect(&self, features: &[f64], distance: Option<f64>) -> Result<Label, NavError>;
}

/// A trained model used as a detector.
pub struct ModelDetector<'a>(pub &'a dyn Model);

impl ObstacleDetector for ModelDetector<'_> {
    fn detect(&self, features: &[f64], _distance: Option<f64>) -> Result<Label, NavError> {
        Ok(self.0.predict(features)?.label)
    }
}

/// Labels straight from the simulator's ground truth.
pub struct GroundTruthOracle {
    pub threshold_cm: f64,
}

impl ObstacleDetector for GroundTruthOracle {
    fn detect(&self, _features: &[f64], distance: Option<f64>) -> Result<Label, NavError> {
        match distance {
            Some(d) => Ok(label_from_distance(d, self.threshold_cm)?),
            None => Ok(Label::Negative),
        }
    }
}

/// Steering rule: go straight unless an obstacle is detected, then turn
/// toward the side with strictly less flow; a tie turns right.
pub fn steer(label: Label, left_intensity: f64, right_intensity: f64) -> NavDecision {
    match label {
        Label::Negative => NavDecision::Forward,
        Label::Positive if left_intensity < right_intensity => NavDecision::Deflect(Side::Left),
        Label::Positive => NavDecision::Deflect(Side::Right),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub decision: NavDecision,
    pub label: Label,
    pub left_intensity: f64,
    pub right_intensity: f64,
}

/// Classifies one flow field and picks a maneuver.
pub fn decide(
    field: &FlowField,
    pattern: &SamplePattern,
    detector: &dyn ObstacleDetector,
    distance: Option<f64>,
) -> Result<Decision, NavError> {
    let left = flow_intensity(field, HalfSelector::LeftOfCenter, pattern)?;
    let right = flow_intensity(field, HalfSelector::RightOfCenter, pattern)?;
    let label = detector.detect(extract_features(field).values(), distance)?;
    Ok(Decision {
        decision: steer(label, left, right),
        label,
        left_intensity: left,
        right_intensity: right,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavConfig {
    pub max_steps: usize,
    /// A collision is logged when the forward range drops below this.
    pub collision_cm: f64,
    /// The run stops once `|x|` or `|y|` exceeds this.
    pub arena_half_extent: f64,
    pub start: CameraPose,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            max_steps: 200,
            collision_cm: 10.0,
            arena_half_extent: 500.0,
            start: CameraPose::new(0.0, 0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavTraceEntry {
    pub step: usize,
    pub pose: CameraPose,
    pub distance: Option<f64>,
    pub label: Label,
    pub decision: NavDecision,
    pub left_intensity: f64,
    pub right_intensity: f64,
    pub field: FlowField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NavSummary {
    pub steps: usize,
    /// Number of times the range dropped below the collision distance
    /// (consecutive colliding steps count once).
    pub collisions: usize,
    pub deflections: usize,
    pub left_arena: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavRun {
    pub trace: Vec<NavTraceEntry>,
    pub summary: NavSummary,
}

/// Drives the camera through `world`. Each cycle renders a frame, estimates
/// flow against the previous frame, decides, and applies the decision
/// before the next capture. A deflection turns first and re-captures the
/// reference frame before moving forward.
pub fn run_navigation(
    world: &World,
    cfg: &SimConfig,
    lk: &LkParams,
    pattern: &SamplePattern,
    detector: &dyn ObstacleDetector,
    nav: &NavConfig,
    seed: u64,
    on_frame: &mut dyn FnMut(usize, &GrayImage) -> Result<(), NavError>,
) -> Result<NavRun, NavError> {
    if nav.max_steps < 2 {
        return Err(NavError::TooFewSteps(nav.max_steps));
    }
    cfg.validate()?;
    world.validate()?;
    lk.validate()?;
    let cfg = SimConfig {
        noise_seed: derive_seed(seed, cfg.noise_seed),
        ..*cfg
    };
    let mut pose = nav.start;
    let first = render(world, &pose, &cfg);
    on_frame(0, &first)?;
    let mut prev = build_pyramid(&first, lk.pyramid_levels)?;
    let mut last = NavDecision::Forward;
    let mut trace = Vec::new();
    let mut summary = NavSummary::default();
    let mut colliding = false;
    for i in 0..nav.max_steps {
        let next_pose = step(&pose, last, &cfg);
        if last != NavDecision::Forward {
            // after a turn the reference is re-captured facing the new
            // heading, so the next flow field only holds forward motion
            let turned = CameraPose {
                heading: next_pose.heading,
                ..pose
            };
            prev = build_pyramid(&render(world, &turned, &cfg), lk.pyramid_levels)?;
        }
        pose = next_pose;
        let frame = render(world, &pose, &cfg);
        on_frame(i + 1, &frame)?;
        let pyr = build_pyramid(&frame, lk.pyramid_levels)?;
        let field = lucas_kanade(&prev, &pyr, pattern, lk)?;
        let distance = nearest_obstacle_distance(world, &pose, cfg.cone_half_angle);
        let d = decide(&field, pattern, detector, distance)?;

        let now_colliding = distance.is_some_and(|d| d < nav.collision_cm);
        if now_colliding && !colliding {
            summary.collisions += 1;
        }
        colliding = now_colliding;
        if d.decision != NavDecision::Forward {
            summary.deflections += 1;
        }
        trace.push(NavTraceEntry {
            step: i,
            pose,
            distance,
            label: d.label,
            decision: d.decision,
            left_intensity: d.left_intensity,
            right_intensity: d.right_intensity,
            field,
        });
        summary.steps += 1;
        last = d.decision;
        prev = pyr;
        if pose.x.abs() > nav.arena_half_extent || pose.y.abs() > nav.arena_half_extent {
            summary.left_arena = true;
            break;
        }
    }
    Ok(NavRun { trace, summary })
}

/// `step,x,y,heading,distance,label,decision,left_intensity,right_intensity`
/// with an empty distance when nothing is in range.
pub fn trace_to_csv(trace: &[NavTraceEntry], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str(c);
        out.push('\n');
    }
    out.push_str("step,x,y,heading,distance,label,decision,left_intensity,right_intensity\n");
    for e in trace {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{},{},{},{:.6},{:.6}",
            e.step,
            e.pose.x,
            e.pose.y,
            e.pose.heading,
            e.distance.map_or(String::new(), |d| format!("{d:.6}")),
            e.label,
            e.decision,
            e.left_intensity,
            e.right_intensity
        );
    }
    out
}

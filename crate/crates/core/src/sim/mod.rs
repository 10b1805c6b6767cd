//! Deterministic synthetic environment: a textured floor plane with
//! camera-facing box obstacles, viewed through a pinhole camera.
//!
//! Ground coordinates are in centimetres with `heading` measured
//! counter-clockwise from the +x axis, so positive turns go left.

mod dataset_gen;
mod noise;
mod render;
mod world;

pub use dataset_gen::{
    default_script, generate_dataset, generate_run_frames, Motion, Run, DEFAULT_FRAMES, DEFAULT_WORLDS,
    MAX_ADVANCE_CM, MAX_TURN_RAD, MIN_ADVANCE_CM, PRIMARY_LATERAL_CM, SENSOR_MAX_RANGE_CM, TURN_PROBABILITY,
};
pub use noise::{value_noise, textured_image};
pub use render::{focal_length, horizon_row, project_obstacle, render, ProjectedRect};
pub use world::{generate_world, parse_world, world_to_text, WORLD_VERSION};

use thiserror::Error;

use crate::features::FeatureError;
use crate::flow::FlowError;
use crate::imaging::ImageError;
use crate::nav::{NavDecision, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulator configuration: {0}")]
    InvalidConfig(String),
    #[error("world file line {line}: {msg}")]
    BadWorld { line: usize, msg: String },
    #[error("dataset script is empty")]
    EmptyScript,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    pub center_x: f64,
    pub center_y: f64,
    pub width: f64,
    pub height: f64,
    pub texture_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub floor_texture_seed: u64,
    pub background_level: f64,
    pub obstacles: Vec<Obstacle>,
}

impl World {
    pub fn empty(floor_texture_seed: u64) -> Self {
        Self {
            floor_texture_seed,
            background_level: 190.0,
            obstacles: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=255.0).contains(&self.background_level) {
            return Err(SimError::InvalidConfig(format!(
                "background level {} outside [0, 255]",
                self.background_level
            )));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.width > 0.0 && o.height > 0.0) || !o.center_x.is_finite() || !o.center_y.is_finite() {
                return Err(SimError::InvalidConfig(format!("obstacle {i} has invalid geometry")));
            }
            if self.obstacles[..i]
                .iter()
                .any(|p| p.center_x == o.center_x && p.center_y == o.center_y)
            {
                return Err(SimError::InvalidConfig(format!(
                    "obstacle {i} shares its position with an earlier obstacle"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub eye_height: f64,
}

pub const DEFAULT_EYE_HEIGHT: f64 = 10.0;

impl CameraPose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading,
            eye_height: DEFAULT_EYE_HEIGHT,
        }
    }

    pub fn forward(&self) -> [f64; 2] {
        [self.heading.cos(), self.heading.sin()]
    }

    /// Unit vector pointing to the camera's right on the ground.
    pub fn right(&self) -> [f64; 2] {
        [self.heading.sin(), -self.heading.cos()]
    }

    /// Depth along the optical axis and lateral offset (positive right) of a
    /// ground point.
    pub fn to_camera(&self, gx: f64, gy: f64) -> (f64, f64) {
        let (dx, dy) = (gx - self.x, gy - self.y);
        let f = self.forward();
        let r = self.right();
        (dx * f[0] + dy * f[1], dx * r[0] + dy * r[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub width: usize,
    pub height: usize,
    /// Horizontal field of view in radians.
    pub horizontal_fov: f64,
    pub step_cm: f64,
    pub turn_rad: f64,
    /// Amplitude of the uniform per-pixel noise, in intensity levels.
    pub noise_amp: f64,
    pub noise_seed: u64,
    /// Half-angle of the emulated range sensor's beam.
    pub cone_half_angle: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            horizontal_fov: 60f64.to_radians(),
            step_cm: 5.0,
            turn_rad: 0.35,
            noise_amp: 2.0,
            noise_seed: 0,
            cone_half_angle: 15f64.to_radians(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = self.width >= 32
            && self.height >= 32
            && self.horizontal_fov > 0.0
            && self.horizontal_fov < std::f64::consts::PI
            && self.step_cm > 0.0
            && self.turn_rad > 0.0
            && self.noise_amp >= 0.0
            && self.cone_half_angle > 0.0
            && self.cone_half_angle < std::f64::consts::FRAC_PI_2;
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// Range reading of an emulated ultrasonic sensor: Euclidean ground distance
/// to the nearest point of any obstacle inside the cone of `cone_half_angle`
/// around the heading, or `None` when the cone is clear.
///
/// An obstacle occupies the same segment the renderer draws: depth `z` along
/// the optical axis, lateral extent `lat +- width / 2`. Measuring to the
/// center point alone would miss a wide obstacle whose center sits outside
/// the cone while its body blocks the path.
pub fn nearest_obstacle_distance(world: &World, pose: &CameraPose, cone_half_angle: f64) -> Option<f64> {
    let reach = cone_half_angle.tan();
    world
        .obstacles
        .iter()
        .filter_map(|o| {
            let (z, lat) = pose.to_camera(o.center_x, o.center_y);
            if z <= 0.0 {
                return None;
            }
            let lo = (lat - o.width / 2.0).max(-z * reach);
            let hi = (lat + o.width / 2.0).min(z * reach);
            (lo <= hi).then(|| z.hypot(0.0f64.clamp(lo, hi)))
        })
        .min_by(f64::total_cmp)
}

/// Kinematics of one cycle: optional turn, then a forward step.
pub fn step(pose: &CameraPose, decision: NavDecision, cfg: &SimConfig) -> CameraPose {
    let heading = match decision {
        NavDecision::Forward => pose.heading,
        NavDecision::Deflect(Side::Left) => pose.heading + cfg.turn_rad,
        NavDecision::Deflect(Side::Right) => pose.heading - cfg.turn_rad,
    };
    let (s, c) = heading.sin_cos();
    CameraPose {
        x: pose.x + cfg.step_cm * c,
        y: pose.y + cfg.step_cm * s,
        heading,
        eye_height: pose.eye_height,
    }
}

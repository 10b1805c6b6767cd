use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::{extract_features, label_from_distance, Dataset, LabeledSample, PatternMeta};
use crate::flow::{lucas_kanade, LkParams, SamplePattern};
use crate::imaging::{build_pyramid, GrayImage};
use crate::seed::derive_seed;

use super::{nearest_obstacle_distance, render, CameraPose, Obstacle, SimConfig, SimError, World};

pub const DEFAULT_WORLDS: usize = 8;
pub const DEFAULT_FRAMES: usize = 60;
/// Distance recorded when no obstacle is inside the sensor cone, matching
/// the nominal maximum range of a hobby ultrasonic ranger.
pub const SENSOR_MAX_RANGE_CM: f64 = 400.0;

/// Forward travel in cm between consecutive frames of a recording.
pub const MIN_ADVANCE_CM: f64 = 2.0;
pub const MAX_ADVANCE_CM: f64 = 9.0;
/// Chance that the driver turns between two frames, and the largest turn.
pub const TURN_PROBABILITY: f64 = 0.3;
pub const MAX_TURN_RAD: f64 = 0.12;
/// Largest sideways offset of the obstacle each recording ends at.
pub const PRIMARY_LATERAL_CM: f64 = 15.0;

/// Camera motion between two frames: a turn, then a forward advance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    pub turn: f64,
    pub advance: f64,
}

impl Motion {
    pub fn apply(&self, pose: &CameraPose) -> CameraPose {
        let heading = pose.heading + self.turn;
        let (s, c) = heading.sin_cos();
        CameraPose {
            x: pose.x + self.advance * c,
            y: pose.y + self.advance * s,
            heading,
            eye_height: pose.eye_height,
        }
    }
}

/// One recording: frame 0 at `start`, then one frame after each motion.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub world: World,
    pub start: CameraPose,
    pub motions: Vec<Motion>,
}

impl Run {
    /// Straight constant-speed run of `frames` frames, `step_cm` apart.
    pub fn straight(world: World, start: CameraPose, frames: usize, step_cm: f64) -> Self {
        Self {
            world,
            start,
            motions: vec![
                Motion {
                    turn: 0.0,
                    advance: step_cm,
                };
                frames.saturating_sub(1)
            ],
        }
    }

    pub fn frames(&self) -> usize {
        self.motions.len() + 1
    }

    /// Camera pose at every frame.
    pub fn poses(&self) -> Vec<CameraPose> {
        let mut poses = Vec::with_capacity(self.frames());
        poses.push(self.start);
        for m in &self.motions {
            let next = m.apply(poses.last().expect("non-empty"));
            poses.push(next);
        }
        poses
    }
}

fn offset(pose: &CameraPose, ahead: f64, right: f64) -> (f64, f64) {
    let f = pose.forward();
    let r = pose.right();
    (
        pose.x + ahead * f[0] + right * r[0],
        pose.y + ahead * f[1] + right * r[1],
    )
}

/// Seeded recording script emulating a remotely driven robot: the speed
/// varies from frame to frame and the driver occasionally makes a gentle
/// turn. Each world puts one obstacle in the path of the final pose, 8-15
/// cm ahead and up to 15 cm to either side, plus one to three distractors at
/// least 60 cm to the side of the path.
pub fn default_script(seed: u64, worlds: usize, frames: usize) -> Vec<Run> {
    (0..worlds)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let motions: Vec<Motion> = (1..frames)
                .map(|_| {
                    let turn = if rng.gen_bool(TURN_PROBABILITY) {
                        rng.gen_range(-MAX_TURN_RAD..MAX_TURN_RAD)
                    } else {
                        0.0
                    };
                    Motion {
                        turn,
                        advance: rng.gen_range(MIN_ADVANCE_CM..MAX_ADVANCE_CM),
                    }
                })
                .collect();
            let mut run = Run {
                world: World::empty(0),
                start: CameraPose::new(0.0, 0.0, 0.0),
                motions,
            };
            let poses = run.poses();
            let last = poses.last().expect("non-empty");
            let (tx, ty) = offset(last, rng.gen_range(8.0..15.0), rng.gen_range(-PRIMARY_LATERAL_CM..PRIMARY_LATERAL_CM));
            let mut obstacles = vec![Obstacle {
                center_x: tx,
                center_y: ty,
                width: rng.gen_range(30.0..60.0f64),
                height: rng.gen_range(25.0..50.0f64),
                texture_seed: rng.gen(),
            }];
            for _ in 0..rng.gen_range(1..=3) {
                let anchor = &poses[rng.gen_range(0..poses.len())];
                let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let (x, y) = offset(anchor, rng.gen_range(0.0..100.0), side * rng.gen_range(60.0..120.0));
                obstacles.push(Obstacle {
                    center_x: x,
                    center_y: y,
                    width: rng.gen_range(30.0..60.0f64),
                    height: rng.gen_range(25.0..50.0f64),
                    texture_seed: rng.gen(),
                });
            }
            run.world = World {
                floor_texture_seed: rng.gen(),
                background_level: rng.gen_range(160.0..215.0f64),
                obstacles,
            };
            run
        })
        .collect()
}

/// Renders the frames of a run.
pub fn generate_run_frames(run: &Run, cfg: &SimConfig) -> Vec<(CameraPose, GrayImage)> {
    run.poses()
        .into_iter()
        .map(|pose| (pose, render(&run.world, &pose, cfg)))
        .collect()
}

/// Builds a labeled dataset from consecutive-frame flow along every run.
/// Each sample is labeled from the ground-truth distance at the newer frame
/// of its pair. `on_frame(run, frame, image)` sees every rendered frame.
pub fn generate_dataset(
    script: &[Run],
    cfg: &SimConfig,
    lk: &LkParams,
    pattern: &SamplePattern,
    threshold_cm: f64,
    seed: u64,
    on_frame: &mut dyn FnMut(usize, usize, &GrayImage) -> Result<(), SimError>,
) -> Result<Dataset, SimError> {
    if script.is_empty() {
        return Err(SimError::EmptyScript);
    }
    cfg.validate()?;
    lk.validate()?;
    let (pw, ph) = pattern.image_dims();
    if (pw, ph) != (cfg.width, cfg.height) {
        return Err(SimError::InvalidConfig(format!(
            "pattern laid out for {pw}x{ph}, renderer produces {}x{}",
            cfg.width, cfg.height
        )));
    }
    let meta = PatternMeta {
        rings: pattern.rings(),
        per_ring: pattern.per_ring(),
        width: cfg.width,
        height: cfg.height,
    };
    let mut samples = Vec::new();
    for (r, run) in script.iter().enumerate() {
        run.world.validate()?;
        let run_cfg = SimConfig {
            noise_seed: derive_seed(seed, r as u64),
            ..*cfg
        };
        let frames = generate_run_frames(run, &run_cfg);
        let mut prev = None;
        for (i, (pose, img)) in frames.iter().enumerate() {
            on_frame(r, i, img)?;
            let pyr = build_pyramid(img, lk.pyramid_levels)?;
            if let Some(prev_pyr) = prev.take() {
                let field = lucas_kanade(&prev_pyr, &pyr, pattern, lk)?;
                let distance = nearest_obstacle_distance(&run.world, pose, cfg.cone_half_angle)
                    .unwrap_or(SENSOR_MAX_RANGE_CM);
                let label = label_from_distance(distance, threshold_cm)?;
                samples.push(LabeledSample::new(
                    extract_features(&field).into_inner(),
                    label,
                    Some(distance),
                ));
            }
            prev = Some(pyr);
        }
    }
    Ok(Dataset::new(samples, Some(meta), threshold_cm)?)
}

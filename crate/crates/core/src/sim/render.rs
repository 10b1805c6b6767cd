use crate::imaging::GrayImage;
use crate::seed::{hash3, mix64};

use super::noise::value_noise;
use super::{CameraPose, Obstacle, SimConfig, World};

/// Octaves as `(cell size in cm, weight)`; weights sum to 1.
const FLOOR_OCTAVES: [(f64, f64); 4] = [(12.0, 0.3), (4.0, 0.3), (1.5, 0.25), (0.6, 0.15)];
const OBSTACLE_OCTAVES: [(f64, f64); 4] = [(10.0, 0.3), (4.0, 0.3), (1.5, 0.25), (0.6, 0.15)];
const FLOOR_BASE: f64 = -35.0;
const FLOOR_SPAN: f64 = 300.0;
const OBSTACLE_BASE: f64 = -40.0;
const OBSTACLE_SPAN: f64 = 320.0;
/// Cap on depth samples per floor pixel.
const MAX_FLOOR_SUBSAMPLES: usize = 16;
/// Obstacles closer than this along the optical axis are not drawn.
const NEAR_CLIP_CM: f64 = 1.0;

/// Pinhole focal length in pixels.
pub fn focal_length(cfg: &SimConfig) -> f64 {
    (cfg.width as f64 / 2.0) / (cfg.horizontal_fov / 2.0).tan()
}

/// Image row of the horizon for a level camera. Rows strictly below it see
/// the floor.
pub fn horizon_row(cfg: &SimConfig) -> f64 {
    cfg.height as f64 / 2.0
}

/// Share of an octave kept at a footprint-to-cell ratio: full below a
/// quarter, none above three quarters, so distant texture never aliases.
fn fade_weight(ratio: f64) -> f64 {
    (1.0 - (ratio - 0.25) / 0.5).clamp(0.0, 1.0)
}

fn octave_seed(seed: u64, k: usize) -> u64 {
    mix64(seed ^ (k as u64 + 1).wrapping_mul(0x9e37_79b9))
}

/// Band-limited multi-octave noise for a pixel with an isotropic footprint.
fn layered(seed: u64, s: f64, t: f64, footprint: f64, octaves: &[(f64, f64)]) -> f64 {
    let mut v = 0.0;
    for (k, &(cell, weight)) in octaves.iter().enumerate() {
        let keep = fade_weight(footprint / cell);
        let n = if keep > 0.0 {
            value_noise(octave_seed(seed, k), s, t, cell)
        } else {
            0.5
        };
        v += weight * (0.5 + keep * (n - 0.5));
    }
    v
}

/// Screen-space rectangle covered by an obstacle, in continuous pixel
/// coordinates; `depth` is the distance along the optical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedRect {
    pub left: f64,
    pub right: f64,
    pub top: f64,
    pub bottom: f64,
    pub depth: f64,
    pub lateral: f64,
}

/// Billboard projection of an obstacle; `None` when it is behind the near
/// clip plane.
pub fn project_obstacle(o: &Obstacle, pose: &CameraPose, cfg: &SimConfig) -> Option<ProjectedRect> {
    let (z, lat) = pose.to_camera(o.center_x, o.center_y);
    if z < NEAR_CLIP_CM {
        return None;
    }
    let f = focal_length(cfg);
    let cx = cfg.width as f64 / 2.0;
    let cy = horizon_row(cfg);
    Some(ProjectedRect {
        left: cx + f * (lat - o.width / 2.0) / z,
        right: cx + f * (lat + o.width / 2.0) / z,
        top: cy - f * (o.height - pose.eye_height) / z,
        bottom: cy + f * pose.eye_height / z,
        depth: z,
        lateral: lat,
    })
}

/// Renders the view from `pose`. Deterministic in all inputs; per-pixel
/// noise is seeded from `cfg.noise_seed` and the pose, so every distinct
/// pose gets fresh noise.
pub fn render(world: &World, pose: &CameraPose, cfg: &SimConfig) -> GrayImage {
    let (w, h) = (cfg.width, cfg.height);
    let f = focal_length(cfg);
    let cx = w as f64 / 2.0;
    let cy = horizon_row(cfg);
    let fwd = pose.forward();
    let right = pose.right();
    let eye = pose.eye_height;

    let mut pixels = vec![world.background_level; w * h];

    for v in 0..h {
        let dv = v as f64 - cy;
        if dv <= 0.0 {
            continue;
        }
        // Box-filter each pixel over its ground footprint. The floor is
        // foreshortened, so a pixel covers far more ground in depth than
        // across: an octave is averaged over enough sub-rows to resolve its
        // cells in depth, and fades out once the remaining footprint is too
        // coarse for it.
        let z = eye * f / dv;
        let depth_extent = z * z / (f * eye);
        let plan: Vec<(f64, Vec<f64>)> = FLOOR_OCTAVES
            .iter()
            .map(|&(cell, _)| {
                let subs = ((4.0 * depth_extent / cell).ceil() as usize).clamp(1, MAX_FLOOR_SUBSAMPLES);
                let keep = fade_weight((z / f).max(depth_extent / subs as f64) / cell);
                let depths = if keep > 0.0 {
                    (0..subs)
                        .map(|k| eye * f / (dv + (k as f64 + 0.5) / subs as f64 - 0.5).max(0.5))
                        .collect()
                } else {
                    Vec::new()
                };
                (keep, depths)
            })
            .collect();
        let row = &mut pixels[v * w..(v + 1) * w];
        for (u, px) in row.iter_mut().enumerate() {
            let x = (u as f64 - cx) / f;
            let (dx, dy) = (fwd[0] + x * right[0], fwd[1] + x * right[1]);
            let mut value = 0.0;
            for (k, (&(cell, weight), (keep, depths))) in FLOOR_OCTAVES.iter().zip(&plan).enumerate() {
                let mut n = 0.5;
                if *keep > 0.0 {
                    let seed = octave_seed(world.floor_texture_seed, k);
                    let sum: f64 = depths
                        .iter()
                        .map(|zs| value_noise(seed, pose.x + zs * dx, pose.y + zs * dy, cell))
                        .sum();
                    n = 0.5 + keep * (sum / depths.len() as f64 - 0.5);
                }
                value += weight * n;
            }
            *px = FLOOR_BASE + FLOOR_SPAN * value;
        }
    }

    let mut visible: Vec<(ProjectedRect, &Obstacle)> = world
        .obstacles
        .iter()
        .filter_map(|o| project_obstacle(o, pose, cfg).map(|r| (r, o)))
        .collect();
    // painter's order: farthest first so nearer obstacles overwrite
    visible.sort_by(|a, b| b.0.depth.total_cmp(&a.0.depth));
    for (r, o) in visible {
        let u0 = r.left.ceil().max(0.0) as usize;
        let u1 = (r.right.ceil().min(w as f64)).max(0.0) as usize;
        let v0 = r.top.ceil().max(0.0) as usize;
        let v1 = (r.bottom.ceil().min(h as f64)).max(0.0) as usize;
        let scale = r.depth / f;
        let left_cm = r.lateral - o.width / 2.0;
        for v in v0..v1 {
            let height_cm = eye - (v as f64 - cy) * scale;
            for u in u0..u1 {
                let s = (u as f64 - cx) * scale - left_cm;
                pixels[v * w + u] = OBSTACLE_BASE
                    + OBSTACLE_SPAN * layered(o.texture_seed, s, height_cm, scale, &OBSTACLE_OCTAVES);
            }
        }
    }

    if cfg.noise_amp > 0.0 {
        let frame_seed = hash3(
            cfg.noise_seed,
            pose.x.to_bits() as i64 ^ pose.heading.to_bits() as i64,
            pose.y.to_bits() as i64,
        );
        for (i, px) in pixels.iter_mut().enumerate() {
            let n = (hash3(frame_seed, i as i64, 0) >> 11) as f64 / (1u64 << 53) as f64;
            *px += cfg.noise_amp * (2.0 * n - 1.0);
        }
    }
    GrayImage::from_fn(w, h, |x, y| pixels[y * w + x])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ahead(distance: f64) -> World {
        World {
            floor_texture_seed: 3,
            background_level: 200.0,
            obstacles: vec![Obstacle {
                center_x: distance,
                center_y: 0.0,
                width: 30.0,
                height: 40.0,
                texture_seed: 11,
            }],
        }
    }

    #[test]
    fn render_is_deterministic() {
        let cfg = SimConfig::default();
        let pose = CameraPose::new(0.0, 0.0, 0.2);
        assert_eq!(render(&ahead(80.0), &pose, &cfg), render(&ahead(80.0), &pose, &cfg));
    }

    #[test]
    fn empty_world_splits_at_horizon() {
        let cfg = SimConfig::default();
        let img = render(&World::empty(5), &CameraPose::new(0.0, 0.0, 0.0), &cfg);
        let hr = horizon_row(&cfg) as usize;
        for y in 0..=hr {
            for x in 0..cfg.width {
                assert!((img.get(x, y) - 190.0).abs() <= cfg.noise_amp);
            }
        }
        // the floor is textured: rows near the camera vary along the row
        let row: Vec<f64> = (0..cfg.width).map(|x| img.get(x, cfg.height - 1)).collect();
        let spread = row.iter().cloned().fold(f64::MIN, f64::max) - row.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 30.0, "floor spread {spread}");
    }

    #[test]
    fn projected_width_halves_with_double_distance() {
        let cfg = SimConfig::default();
        let pose = CameraPose::new(0.0, 0.0, 0.0);
        let r50 = project_obstacle(&ahead(50.0).obstacles[0], &pose, &cfg).unwrap();
        let r100 = project_obstacle(&ahead(100.0).obstacles[0], &pose, &cfg).unwrap();
        let (w50, w100) = (r50.right - r50.left, r100.right - r100.left);
        assert!((w50 - 2.0 * w100).abs() < 1.0);
        // and the rendered rows agree with the analytic rectangle within 1 px
        let quiet = SimConfig {
            noise_amp: 0.0,
            ..cfg
        };
        let img = render(&ahead(100.0), &pose, &quiet);
        let y = (horizon_row(&cfg) - 5.0) as usize;
        let covered = (0..cfg.width).filter(|&x| img.get(x, y) != 200.0).count() as f64;
        assert!((covered - w100).abs() <= 1.0, "{covered} vs {w100}");
    }

    #[test]
    fn nearer_obstacle_occludes() {
        let cfg = SimConfig {
            noise_amp: 0.0,
            ..SimConfig::default()
        };
        let mut world = ahead(200.0);
        world.obstacles.push(Obstacle {
            center_x: 60.0,
            center_y: 0.0,
            width: 30.0,
            height: 40.0,
            texture_seed: 99,
        });
        let pose = CameraPose::new(0.0, 0.0, 0.0);
        let both = render(&world, &pose, &cfg);
        let near_only = render(
            &World {
                obstacles: vec![world.obstacles[1]],
                ..world.clone()
            },
            &pose,
            &cfg,
        );
        // at the image center the near obstacle is what we see
        assert_eq!(both.get(160, 110), near_only.get(160, 110));
    }
}

use std::f64::consts::PI;

use super::FlowError;

/// Fraction of `min(width, height)` used as the outermost ring radius.
pub const DEFAULT_OUTER_FRACTION: f64 = 0.45;
/// Ratio between successive ring radii.
pub const DEFAULT_GROWTH: f64 = 1.7;
pub const DEFAULT_RINGS: usize = 5;
pub const DEFAULT_PER_RING: usize = 20;

/// Center point plus concentric rings of equally spaced observation points.
///
/// Point 0 is the center; the remaining points are stored ring-major
/// (innermost ring first), angle-minor starting from the +x axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePattern {
    center: [f64; 2],
    rings: usize,
    per_ring: usize,
    radii: Vec<f64>,
    points: Vec<[f64; 2]>,
    width: usize,
    height: usize,
}

impl SamplePattern {
    pub fn center(&self) -> [f64; 2] {
        self.center
    }
    pub fn rings(&self) -> usize {
        self.rings
    }
    pub fn per_ring(&self) -> usize {
        self.per_ring
    }
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    /// Image size the pattern was laid out for.
    pub fn image_dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

/// Default layout: outer radius `0.45 * min(w, h)`, growth ratio 1.7.
pub fn generate_pattern(
    width: usize,
    height: usize,
    rings: usize,
    per_ring: usize,
) -> Result<SamplePattern, FlowError> {
    generate_pattern_with(
        width,
        height,
        rings,
        per_ring,
        DEFAULT_OUTER_FRACTION,
        DEFAULT_GROWTH,
    )
}

pub fn generate_pattern_with(
    width: usize,
    height: usize,
    rings: usize,
    per_ring: usize,
    outer_fraction: f64,
    growth: f64,
) -> Result<SamplePattern, FlowError> {
    if width < 32 || height < 32 {
        return Err(FlowError::InvalidPattern(format!(
            "image {width}x{height} smaller than 32x32"
        )));
    }
    if rings < 1 || per_ring < 4 {
        return Err(FlowError::InvalidPattern(format!(
            "need rings >= 1 and per_ring >= 4 (got {rings}, {per_ring})"
        )));
    }
    if !(outer_fraction > 0.0 && outer_fraction <= 0.5) || !(growth > 1.0) {
        return Err(FlowError::InvalidPattern(format!(
            "outer fraction {outer_fraction} must be in (0, 0.5], growth {growth} > 1"
        )));
    }
    let center = [width as f64 / 2.0, height as f64 / 2.0];
    let r_max = outer_fraction * width.min(height) as f64;
    let radii: Vec<f64> = (1..=rings)
        .map(|k| r_max * growth.powi(k as i32 - rings as i32))
        .collect();

    let mut points = Vec::with_capacity(1 + rings * per_ring);
    points.push(center);
    for &r in &radii {
        for j in 0..per_ring {
            let theta = 2.0 * PI * j as f64 / per_ring as f64;
            let (s, c) = theta.sin_cos();
            points.push([center[0] + r * snap(c), center[1] + r * snap(s)]);
        }
    }
    let (max_x, max_y) = ((width - 1) as f64, (height - 1) as f64);
    if let Some(p) = points
        .iter()
        .find(|p| p[0] < 0.0 || p[1] < 0.0 || p[0] > max_x || p[1] > max_y)
    {
        return Err(FlowError::PatternOutOfBounds { x: p[0], y: p[1] });
    }
    Ok(SamplePattern {
        center,
        rings,
        per_ring,
        radii,
        points,
        width,
        height,
    })
}

// cos(pi/2) is 6e-17, not 0; snapping keeps on-axis points exactly on the
// center row/column.
fn snap(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else {
        v
    }
}

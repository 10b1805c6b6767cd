use crate::imaging::{GrayImage, Pyramid};

use super::{FlowError, FlowField, SamplePattern, TrackStatus};

/// Pyramidal Lucas-Kanade settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LkParams {
    /// Half window size; the window is `(2 * window_half + 1)^2` pixels.
    pub window_half: usize,
    pub pyramid_levels: usize,
    /// Iteration cap per pyramid level.
    pub max_iters: usize,
    /// Convergence threshold on the update norm, in pixels.
    pub epsilon: f64,
    /// Minimum smaller eigenvalue of the structure matrix, computed on
    /// `[0, 1]` intensities and divided by the window pixel count.
    pub min_eig: f64,
}

impl Default for LkParams {
    fn default() -> Self {
        Self {
            window_half: 10,
            pyramid_levels: 3,
            max_iters: 30,
            epsilon: 0.01,
            min_eig: 1e-4,
        }
    }
}

impl LkParams {
    pub fn validate(&self) -> Result<(), FlowError> {
        if self.window_half == 0
            || self.pyramid_levels == 0
            || self.max_iters == 0
            || !(self.epsilon > 0.0)
            || !(self.min_eig > 0.0)
        {
            return Err(FlowError::InvalidParams(format!("{self:?}")));
        }
        Ok(())
    }
}

/// Sparse flow from `prev` to `next` at every pattern point.
pub fn lucas_kanade(
    prev: &Pyramid,
    next: &Pyramid,
    pattern: &SamplePattern,
    params: &LkParams,
) -> Result<FlowField, FlowError> {
    lucas_kanade_with_work(prev, next, pattern, params).map(|(f, _)| f)
}

/// Same as [`lucas_kanade`], also returning the total number of refinement
/// iterations performed across all points and levels.
pub fn lucas_kanade_with_work(
    prev: &Pyramid,
    next: &Pyramid,
    pattern: &SamplePattern,
    params: &LkParams,
) -> Result<(FlowField, usize), FlowError> {
    params.validate()?;
    if prev.len() != next.len()
        || prev
            .levels()
            .iter()
            .zip(next.levels())
            .any(|(a, b)| a.dims() != b.dims())
    {
        return Err(FlowError::DimensionMismatch {
            prev: prev.base().dims(),
            next: next.base().dims(),
        });
    }
    let levels = params.pyramid_levels.min(prev.len());
    let mut tracker = PointTracker::new(params);
    let mut vectors = Vec::with_capacity(pattern.len());
    let mut status = Vec::with_capacity(pattern.len());
    let mut work = 0usize;
    for &p in pattern.points() {
        let (v, s, iters) = tracker.track(prev, next, levels, p);
        vectors.push(v);
        status.push(s);
        work += iters;
    }
    Ok((FlowField::from_parts(vectors, status), work))
}

/// Scratch buffers reused across points.
struct PointTracker<'a> {
    params: &'a LkParams,
    template: Vec<f64>,
    grad_x: Vec<f64>,
    grad_y: Vec<f64>,
    patch: Vec<f64>,
    warped: Vec<f64>,
}

impl<'a> PointTracker<'a> {
    fn new(params: &'a LkParams) -> Self {
        let side = 2 * params.window_half + 1;
        Self {
            params,
            template: vec![0.0; side * side],
            grad_x: vec![0.0; side * side],
            grad_y: vec![0.0; side * side],
            patch: Vec::with_capacity((side + 2) * (side + 2)),
            warped: Vec::with_capacity(side * side),
        }
    }

    fn track(
        &mut self,
        prev: &Pyramid,
        next: &Pyramid,
        levels: usize,
        point: [f64; 2],
    ) -> ([f64; 2], TrackStatus, usize) {
        let mut guess = [0.0f64; 2];
        let mut iters_total = 0usize;
        let mut finest_min_eig = 0.0;
        for level in (0..levels).rev() {
            let scale = (1u64 << level) as f64;
            let p = [point[0] / scale, point[1] / scale];
            let (g, min_eig) = self.load_window(prev.level(level), p);
            if level == 0 {
                finest_min_eig = min_eig;
            }
            let mut d = [0.0f64; 2];
            if let Some(inv) = invert(g) {
                for _ in 0..self.params.max_iters {
                    iters_total += 1;
                    let b = self.mismatch(next.level(level), [p[0] + guess[0] + d[0], p[1] + guess[1] + d[1]]);
                    let step = [inv[0] * b[0] + inv[1] * b[1], inv[1] * b[0] + inv[2] * b[1]];
                    if !(step[0].is_finite() && step[1].is_finite()) {
                        break;
                    }
                    d[0] += step[0];
                    d[1] += step[1];
                    if step[0].hypot(step[1]) < self.params.epsilon {
                        break;
                    }
                }
            }
            if level > 0 {
                guess = [2.0 * (guess[0] + d[0]), 2.0 * (guess[1] + d[1])];
            } else {
                guess = [guess[0] + d[0], guess[1] + d[1]];
            }
        }

        let base = prev.base();
        let tx = point[0] + guess[0];
        let ty = point[1] + guess[1];
        let in_bounds = tx.is_finite()
            && ty.is_finite()
            && tx >= 0.0
            && ty >= 0.0
            && tx <= (base.width() - 1) as f64
            && ty <= (base.height() - 1) as f64;
        if finest_min_eig < self.params.min_eig || !in_bounds {
            ([0.0, 0.0], TrackStatus::Lost, iters_total)
        } else {
            (guess, TrackStatus::Tracked, iters_total)
        }
    }

    /// Fills template and gradients around `p`; returns the structure matrix
    /// (packed as `[gxx, gxy, gyy]`) and its normalized smaller eigenvalue.
    fn load_window(&mut self, img: &GrayImage, p: [f64; 2]) -> ([f64; 3], f64) {
        let h = self.params.window_half;
        let side = 2 * h + 1;
        // one-pixel apron so central differences come from the same patch
        let outer = side + 2;
        sample_patch(img, p, h + 1, &mut self.patch);
        let mut gxx = 0.0;
        let mut gxy = 0.0;
        let mut gyy = 0.0;
        let mut k = 0;
        for r in 1..=side {
            for c in 1..=side {
                let at = r * outer + c;
                let ix = 0.5 * (self.patch[at + 1] - self.patch[at - 1]);
                let iy = 0.5 * (self.patch[at + outer] - self.patch[at - outer]);
                self.template[k] = self.patch[at];
                self.grad_x[k] = ix;
                self.grad_y[k] = iy;
                gxx += ix * ix;
                gxy += ix * iy;
                gyy += iy * iy;
                k += 1;
            }
        }
        let norm = 255.0 * 255.0 * k as f64;
        let (a, b, c) = (gxx / norm, gxy / norm, gyy / norm);
        let min_eig = 0.5 * (a + c) - (0.25 * (a - c) * (a - c) + b * b).sqrt();
        ([gxx, gxy, gyy], min_eig)
    }

    fn mismatch(&mut self, img: &GrayImage, q: [f64; 2]) -> [f64; 2] {
        sample_patch(img, q, self.params.window_half, &mut self.warped);
        let mut bx = 0.0;
        let mut by = 0.0;
        for (k, w) in self.warped.iter().enumerate() {
            let diff = self.template[k] - w;
            bx += diff * self.grad_x[k];
            by += diff * self.grad_y[k];
        }
        [bx, by]
    }
}

/// Bilinear samples on the integer-offset grid `p + (dx, dy)`,
/// `|dx|, |dy| <= half`, row-major. Every sample shares the same fractional
/// weights, so a window clear of the border is read straight from the rows.
fn sample_patch(img: &GrayImage, p: [f64; 2], half: usize, out: &mut Vec<f64>) {
    let side = 2 * half + 1;
    out.clear();
    let (w, hgt) = img.dims();
    let (x0, y0) = (p[0].floor(), p[1].floor());
    let h = half as f64;
    let interior = x0 - h >= 0.0 && y0 - h >= 0.0 && x0 + h + 1.0 < w as f64 && y0 + h + 1.0 < hgt as f64;
    if !interior {
        let hi = half as isize;
        for dy in -hi..=hi {
            for dx in -hi..=hi {
                out.push(img.sample_bilinear(p[0] + dx as f64, p[1] + dy as f64));
            }
        }
        return;
    }
    let (fx, fy) = (p[0] - x0, p[1] - y0);
    let (left, top) = (x0 as usize - half, y0 as usize - half);
    let px = img.pixels();
    for r in 0..side {
        let row0 = &px[(top + r) * w + left..][..side + 1];
        let row1 = &px[(top + r + 1) * w + left..][..side + 1];
        for c in 0..side {
            let a = row0[c] * (1.0 - fx) + row0[c + 1] * fx;
            let b = row1[c] * (1.0 - fx) + row1[c + 1] * fx;
            out.push(a * (1.0 - fy) + b * fy);
        }
    }
}

/// Inverse of a packed symmetric 2x2 matrix, `None` when (near) singular.
fn invert(g: [f64; 3]) -> Option<[f64; 3]> {
    let [a, b, c] = g;
    let det = a * c - b * b;
    let scale = (a + c).max(f64::MIN_POSITIVE);
    if !(det.is_finite()) || det <= 1e-12 * scale * scale {
        return None;
    }
    Some([c / det, -b / det, a / det])
}

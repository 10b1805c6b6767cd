use std::collections::VecDeque;
use std::rc::Rc;

use super::LearnError;

/// RBF kernel width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub gamma: f64,
}

impl KernelParams {
    pub fn new(gamma: f64) -> Result<Self, LearnError> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(LearnError::NonPositiveHyperparameter {
                name: "gamma",
                value: gamma,
            });
        }
        Ok(Self { gamma })
    }
}

/// `exp(-gamma * |x - z|^2)`.
pub fn rbf(x: &[f64], z: &[f64], gamma: f64) -> Result<f64, LearnError> {
    if x.len() != z.len() {
        return Err(LearnError::LengthMismatch {
            expected: x.len(),
            found: z.len(),
        });
    }
    if !(gamma > 0.0) {
        return Err(LearnError::NonPositiveHyperparameter {
            name: "gamma",
            value: gamma,
        });
    }
    Ok(rbf_unchecked(x, z, gamma))
}

#[inline]
pub(crate) fn rbf_unchecked(x: &[f64], z: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Lazily computed rows of the RBF Gram matrix with a bounded FIFO cache.
pub(crate) struct KernelCache<'a> {
    points: &'a [Vec<f64>],
    gamma: f64,
    rows: Vec<Option<Rc<[f64]>>>,
    order: VecDeque<usize>,
    capacity: usize,
}

/// Rows kept in memory at most (bounded to roughly 256 MiB of f64s).
const CACHE_BYTES: usize = 256 << 20;

impl<'a> KernelCache<'a> {
    pub fn new(points: &'a [Vec<f64>], gamma: f64) -> Self {
        let n = points.len().max(1);
        let capacity = (CACHE_BYTES / (8 * n)).clamp(2, n);
        Self {
            points,
            gamma,
            rows: vec![None; points.len()],
            order: VecDeque::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn row(&mut self, i: usize) -> Rc<[f64]> {
        if let Some(r) = &self.rows[i] {
            return Rc::clone(r);
        }
        if self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows[old] = None;
            }
        }
        let xi = &self.points[i];
        let row: Rc<[f64]> = self
            .points
            .iter()
            .map(|xj| rbf_unchecked(xi, xj, self.gamma))
            .collect();
        self.rows[i] = Some(Rc::clone(&row));
        self.order.push_back(i);
        row
    }
}

//! Sequential minimal optimization for the kernel dual
//!
//! ```text
//! minimize    1/2 a'Qa + p'a
//! subject to  y'a = 0,  0 <= a_t <= upper_t
//! ```
//!
//! where every variable `t` refers to a training point `point(t)` and
//! `Q_ts = y_t y_s K(point(t), point(s))`. C-SVC uses one variable per point;
//! epsilon-SVR uses two (`a` and `a*`) per point.
//!
//! The working pair is the maximal violating pair; iteration stops when the
//! KKT gap `m(a) - M(a)` drops below the tolerance.

use super::kernel::KernelCache;
use super::LearnError;

/// Fallback curvature for non-positive-definite pairs.
const TAU: f64 = 1e-12;
/// Relative distance below which a variable is moved onto its bound.
const BOUND_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoConfig {
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

pub(crate) struct DualProblem<'k, 'p> {
    pub kernel: &'k mut KernelCache<'p>,
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Offset such that the decision function is `sum y_t a_t K(., x) - rho`.
    pub rho: f64,
    /// Final value of the minimized objective `1/2 a'Qa + p'a`.
    pub objective: f64,
    /// KKT gap at termination.
    pub violation: f64,
    pub iterations: usize,
    /// Objective after every pair update, when requested.
    pub objective_trace: Vec<f64>,
}

impl<'k, 'p> DualProblem<'k, 'p> {
    pub fn solve(self, cfg: &SmoConfig, record_trace: bool) -> Result<SmoSolution, LearnError> {
        let DualProblem {
            kernel,
            y,
            p,
            upper,
        } = self;
        let m = y.len();
        let n = kernel.len();
        let point = |t: usize| t % n;
        let mut alpha = vec![0.0; m];
        let mut grad = p.clone();
        let mut trace = Vec::new();
        let objective = |alpha: &[f64], grad: &[f64]| -> f64 {
            0.5 * alpha
                .iter()
                .zip(grad)
                .zip(&p)
                .map(|((a, g), pp)| a * (g + pp))
                .sum::<f64>()
        };

        let mut iterations = 0usize;
        let violation = loop {
            // maximal violating pair
            let mut g_max = f64::NEG_INFINITY;
            let mut g_min = f64::INFINITY;
            let mut i_sel = usize::MAX;
            let mut j_sel = usize::MAX;
            for t in 0..m {
                let v = -y[t] * grad[t];
                let in_up = if y[t] > 0.0 { alpha[t] < upper[t] } else { alpha[t] > 0.0 };
                let in_low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < upper[t] };
                if in_up && v > g_max {
                    g_max = v;
                    i_sel = t;
                }
                if in_low && v < g_min {
                    g_min = v;
                    j_sel = t;
                }
            }
            let gap = if i_sel == usize::MAX || j_sel == usize::MAX {
                0.0
            } else {
                g_max - g_min
            };
            if gap < cfg.tol {
                break gap.max(0.0);
            }
            if iterations >= cfg.max_iter {
                return Err(LearnError::NonConvergence {
                    iterations,
                    violation: gap,
                });
            }
            iterations += 1;

            let (i, j) = (i_sel, j_sel);
            let row_i = kernel.row(point(i));
            let row_j = kernel.row(point(j));
            let q_ii = row_i[point(i)];
            let q_jj = row_j[point(j)];
            let q_ij = y[i] * y[j] * row_i[point(j)];
            let (c_i, c_j) = (upper[i], upper[j]);
            let (old_i, old_j) = (alpha[i], alpha[j]);

            if y[i] != y[j] {
                let mut quad = q_ii + q_jj + 2.0 * q_ij;
                if quad <= 0.0 {
                    quad = TAU;
                }
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > c_i - c_j {
                    if alpha[i] > c_i {
                        alpha[i] = c_i;
                        alpha[j] = c_i - diff;
                    }
                } else if alpha[j] > c_j {
                    alpha[j] = c_j;
                    alpha[i] = c_j + diff;
                }
            } else {
                let mut quad = q_ii + q_jj - 2.0 * q_ij;
                if quad <= 0.0 {
                    quad = TAU;
                }
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c_i {
                    if alpha[i] > c_i {
                        alpha[i] = c_i;
                        alpha[j] = sum - c_i;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c_j {
                    if alpha[j] > c_j {
                        alpha[j] = c_j;
                        alpha[i] = sum - c_j;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }

            // rounding can leave a variable an ulp off its bound, which would
            // then count as free when computing rho
            for (t, c) in [(i, c_i), (j, c_j)] {
                if alpha[t] >= c * (1.0 - BOUND_SNAP) {
                    alpha[t] = c;
                } else if alpha[t] <= c * BOUND_SNAP {
                    alpha[t] = 0.0;
                }
            }

            let d_i = (alpha[i] - old_i) * y[i];
            let d_j = (alpha[j] - old_j) * y[j];
            for t in 0..m {
                let pt = point(t);
                grad[t] += y[t] * (d_i * row_i[pt] + d_j * row_j[pt]);
            }
            if record_trace {
                trace.push(objective(&alpha, &grad));
            }
        };

        let rho = compute_rho(&y, &alpha, &grad, &upper);
        Ok(SmoSolution {
            objective: objective(&alpha, &grad),
            alpha,
            rho,
            violation,
            iterations,
            objective_trace: trace,
        })
    }
}

/// Average of `y_t G_t` over free variables, or the midpoint of the feasible
/// interval when every variable sits at a bound.
fn compute_rho(y: &[f64], alpha: &[f64], grad: &[f64], upper: &[f64]) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= upper[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    }
}

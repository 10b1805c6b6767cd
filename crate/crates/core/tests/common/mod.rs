//! Shared test helpers: a projected-gradient QP oracle for the kernel duals
//! and seeded toy datasets.

#![allow(dead_code)]

use flownav::features::{Dataset, Label, LabeledSample};
use flownav::learn::{
    classify_svr, predict_svm, svm_kkt_violation, svr_kkt_violation, train_svm_traced, train_svr_traced, SvmModel,
    SvmParams, SvrModel, SvrParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dual problem `min 1/2 a'Qa + p'a` s.t. `y'a = 0`, `0 <= a <= upper`.
pub struct Qp {
    pub q: Vec<Vec<f64>>,
    pub p: Vec<f64>,
    pub y: Vec<f64>,
    pub upper: Vec<f64>,
}

pub struct QpSolution {
    pub alpha: Vec<f64>,
    pub objective: f64,
    pub rho: f64,
    /// Projected-gradient residual at termination.
    pub gap: f64,
    pub iterations: usize,
}

impl Qp {
    pub fn objective(&self, a: &[f64]) -> f64 {
        let qa = self.mul(a);
        0.5 * dot(a, &qa) + dot(&self.p, a)
    }

    fn mul(&self, a: &[f64]) -> Vec<f64> {
        self.q.iter().map(|row| dot(row, a)).collect()
    }

    fn grad(&self, a: &[f64]) -> Vec<f64> {
        self.mul(a).iter().zip(&self.p).map(|(g, p)| g + p).collect()
    }

    /// Euclidean projection onto the feasible set: clip `v - lambda y` to the
    /// box and bisect on `lambda` until `y'a = 0`.
    fn project(&self, v: &[f64]) -> Vec<f64> {
        let at = |lambda: f64| -> Vec<f64> {
            v.iter()
                .zip(&self.y)
                .zip(&self.upper)
                .map(|((vi, yi), ui)| (vi - lambda * yi).clamp(0.0, *ui))
                .collect()
        };
        let eq = |a: &[f64]| dot(a, &self.y);
        let bound = v.iter().map(|x| x.abs()).fold(0.0, f64::max)
            + self.upper.iter().cloned().fold(0.0, f64::max)
            + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if eq(&at(mid)) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    }

    /// Maximal-violating-pair gap of `a`, plus the offset `rho`.
    fn gap_and_rho(&self, a: &[f64]) -> (f64, f64) {
        let g = self.grad(a);
        let tol = 1e-12;
        let (mut m, mut big_m) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut free_sum, mut free_n) = (0.0, 0usize);
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        for t in 0..a.len() {
            let (y, u) = (self.y[t], self.upper[t]);
            let at_low = a[t] <= tol * u;
            let at_up = a[t] >= u * (1.0 - tol);
            let r = y * g[t];
            let in_up = (y > 0.0 && !at_up) || (y < 0.0 && !at_low);
            let in_low = (y > 0.0 && !at_low) || (y < 0.0 && !at_up);
            if in_up {
                m = m.max(-r);
            }
            if in_low {
                big_m = big_m.min(-r);
            }
            if !at_low && !at_up {
                free_sum += r;
                free_n += 1;
            } else if (y > 0.0 && at_low) || (y < 0.0 && at_up) {
                ub = ub.min(r);
            } else {
                lb = lb.max(r);
            }
        }
        let rho = if free_n > 0 {
            free_sum / free_n as f64
        } else {
            0.5 * (ub + lb)
        };
        ((m - big_m).max(0.0), rho)
    }

    /// Projected-gradient stationarity residual `|a - P(a - grad)|_inf`.
    pub fn residual(&self, a: &[f64]) -> f64 {
        let g = self.grad(a);
        let v: Vec<f64> = a.iter().zip(&g).map(|(x, gi)| x - gi).collect();
        self.project(&v)
            .iter()
            .zip(a)
            .map(|(p, x)| (p - x).abs())
            .fold(0.0, f64::max)
    }

    /// Solves the equality-constrained QP over the variables strictly inside
    /// the box with the rest frozen; `None` when the result leaves the box or
    /// the system is singular.
    fn polish(&self, a: &[f64]) -> Option<Vec<f64>> {
        let tol = 1e-9;
        let free: Vec<usize> = (0..a.len())
            .filter(|&t| a[t] > tol * self.upper[t] && a[t] < self.upper[t] * (1.0 - tol))
            .collect();
        if free.is_empty() {
            return None;
        }
        let k = free.len();
        let mut m = vec![vec![0.0; k + 2]; k + 1];
        for (r, &i) in free.iter().enumerate() {
            let mut rhs = -self.p[i];
            for t in 0..a.len() {
                if !free.contains(&t) {
                    rhs -= self.q[i][t] * a[t];
                }
            }
            for (c, &j) in free.iter().enumerate() {
                m[r][c] = self.q[i][j];
            }
            m[r][k] = self.y[i];
            m[r][k + 1] = rhs;
            m[k][r] = self.y[i];
        }
        m[k][k + 1] = -(0..a.len()).filter(|t| !free.contains(t)).map(|t| self.y[t] * a[t]).sum::<f64>();
        let x = gauss_solve(m)?;
        let mut out = a.to_vec();
        for (r, &i) in free.iter().enumerate() {
            if x[r] < 0.0 || x[r] > self.upper[i] {
                return None;
            }
            out[i] = x[r];
        }
        Some(out)
    }

    /// Accelerated projected gradient with adaptive restart. Every few hundred
    /// steps the current free set is solved exactly; the run ends once the
    /// projected-gradient residual is below `tol`.
    pub fn solve(&self, tol: f64, max_iter: usize) -> QpSolution {
        let n = self.p.len();
        let lipschitz = self
            .q
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            .max(1e-12);
        let step = 1.0 / lipschitz;
        let mut a = self.project(&vec![0.0; n]);
        let mut z = a.clone();
        let mut t = 1.0f64;
        let mut f_prev = self.objective(&a);
        let mut iterations = 0;
        while iterations < max_iter {
            iterations += 1;
            if iterations % 200 == 0 {
                if let Some(p) = self.polish(&a) {
                    if self.objective(&p) <= f_prev {
                        a = p;
                        z = a.clone();
                        t = 1.0;
                        f_prev = self.objective(&a);
                    }
                }
                if self.residual(&a) < tol {
                    break;
                }
            }
            let g = self.grad(&z);
            let v: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - step * gi).collect();
            let next = self.project(&v);
            let f = self.objective(&next);
            if f > f_prev + 1e-14 * f_prev.abs().max(1.0) {
                z = a.clone();
                t = 1.0;
                continue;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            z = next.iter().zip(&a).map(|(x, xo)| x + beta * (x - xo)).collect();
            a = next;
            t = t_next;
            f_prev = f;
        }
        let (_, rho) = self.gap_and_rho(&a);
        QpSolution {
            objective: self.objective(&a),
            gap: self.residual(&a),
            alpha: a,
            rho,
            iterations,
        }
    }
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn gauss_solve(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()).exp()
}

/// Min-max scaling fitted on `rows`, applied to `x`.
pub struct Scale {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Scale {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows[0].len();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for r in rows {
            for j in 0..d {
                lo[j] = lo[j].min(r[j]);
                hi[j] = hi[j].max(r[j]);
            }
        }
        Self { lo, hi }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, v)| {
                if self.hi[j] > self.lo[j] {
                    (v - self.lo[j]) / (self.hi[j] - self.lo[j])
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Reference C-SVC: scaled features, per-class box bounds `C w_y`.
pub struct OracleSvc {
    pub scale: Scale,
    pub points: Vec<Vec<f64>>,
    pub coefs: Vec<f64>,
    pub rho: f64,
    pub gamma: f64,
    pub objective: f64,
    pub gap: f64,
}

impl OracleSvc {
    pub fn fit(ds: &Dataset, c: f64, gamma: f64, balanced: bool, tol: f64) -> Self {
        let rows: Vec<Vec<f64>> = ds.samples().iter().map(|s| s.features.clone()).collect();
        let scale = Scale::fit(&rows);
        let points: Vec<Vec<f64>> = rows.iter().map(|r| scale.apply(r)).collect();
        let y: Vec<f64> = ds.samples().iter().map(|s| s.label.as_f64()).collect();
        let n = y.len() as f64;
        let n_pos = y.iter().filter(|v| **v > 0.0).count() as f64;
        let (w_neg, w_pos) = if balanced {
            (n / (2.0 * (n - n_pos)), n / (2.0 * n_pos))
        } else {
            (1.0, 1.0)
        };
        let qp = Qp {
            q: (0..y.len())
                .map(|i| (0..y.len()).map(|j| y[i] * y[j] * rbf(&points[i], &points[j], gamma)).collect())
                .collect(),
            p: vec![-1.0; y.len()],
            upper: y.iter().map(|v| if *v > 0.0 { c * w_pos } else { c * w_neg }).collect(),
            y: y.clone(),
        };
        let sol = qp.solve(tol, 200_000);
        Self {
            scale,
            coefs: sol.alpha.iter().zip(&y).map(|(a, y)| a * y).collect(),
            points,
            rho: sol.rho,
            gamma,
            objective: sol.objective,
            gap: sol.gap,
        }
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        let z = self.scale.apply(x);
        self.points
            .iter()
            .zip(&self.coefs)
            .map(|(p, c)| c * rbf(p, &z, self.gamma))
            .sum::<f64>()
            - self.rho
    }
}

/// Reference epsilon-SVR with `2n` dual variables.
pub struct OracleSvr {
    pub scale: Scale,
    pub points: Vec<Vec<f64>>,
    pub coefs: Vec<f64>,
    pub rho: f64,
    pub gamma: f64,
    pub objective: f64,
    pub gap: f64,
}

impl OracleSvr {
    pub fn fit(ds: &Dataset, c: f64, gamma: f64, epsilon: f64, tol: f64) -> Self {
        let rows: Vec<Vec<f64>> = ds.samples().iter().map(|s| s.features.clone()).collect();
        let scale = Scale::fit(&rows);
        let points: Vec<Vec<f64>> = rows.iter().map(|r| scale.apply(r)).collect();
        let z: Vec<f64> = ds.samples().iter().map(|s| s.distance.unwrap()).collect();
        let n = z.len();
        let y: Vec<f64> = (0..2 * n).map(|t| if t < n { 1.0 } else { -1.0 }).collect();
        let p: Vec<f64> = (0..2 * n)
            .map(|t| if t < n { epsilon - z[t] } else { epsilon + z[t - n] })
            .collect();
        let q = (0..2 * n)
            .map(|s| {
                (0..2 * n)
                    .map(|t| y[s] * y[t] * rbf(&points[s % n], &points[t % n], gamma))
                    .collect()
            })
            .collect();
        let qp = Qp {
            q,
            p,
            y,
            upper: vec![c; 2 * n],
        };
        let sol = qp.solve(tol, 200_000);
        Self {
            scale,
            coefs: (0..n).map(|i| sol.alpha[i] - sol.alpha[i + n]).collect(),
            points,
            rho: sol.rho,
            gamma,
            objective: sol.objective,
            gap: sol.gap,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let z = self.scale.apply(x);
        self.points
            .iter()
            .zip(&self.coefs)
            .map(|(p, c)| c * rbf(p, &z, self.gamma))
            .sum::<f64>()
            - self.rho
    }
}

/// Random classification set with both classes present and `dims` features.
pub fn random_classification(rng: &mut ChaCha8Rng, n: usize, dims: usize) -> Dataset {
    let mut samples: Vec<LabeledSample> = (0..n)
        .map(|i| {
            let label = if i % 2 == 0 { Label::Positive } else { Label::Negative };
            let shift = if label == Label::Positive { 0.7 } else { 0.0 };
            let x = (0..dims).map(|_| rng.gen_range(0.0..1.0) + shift * rng.gen_range(0.0..1.0)).collect();
            LabeledSample::new(x, label, None)
        })
        .collect();
    // shuffle order so the class pattern is not fixed
    for i in (1..samples.len()).rev() {
        let j = rng.gen_range(0..=i);
        samples.swap(i, j);
    }
    Dataset::new(samples, None, 50.0).unwrap()
}

/// Random regression set: distances in cm that depend on the features.
pub fn random_regression(rng: &mut ChaCha8Rng, n: usize, dims: usize) -> Dataset {
    let samples = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..dims).map(|_| rng.gen_range(0.0..1.0)).collect();
            let d = 20.0 + 120.0 * x[0] + rng.gen_range(-10.0..10.0);
            let label = if d <= 50.0 { Label::Positive } else { Label::Negative };
            LabeledSample::new(x, label, Some(d))
        })
        .collect();
    Dataset::new(samples, None, 50.0).unwrap()
}

/// 100 probe points: a 10x10 grid over the first two features spanning the
/// training range with a margin, other features held at a random value.
pub fn probe_grid(rng: &mut ChaCha8Rng, ds: &Dataset) -> Vec<Vec<f64>> {
    let d = ds.dims();
    let (mut lo, mut hi) = (vec![f64::INFINITY; d], vec![f64::NEG_INFINITY; d]);
    for s in ds.samples() {
        for j in 0..d {
            lo[j] = lo[j].min(s.features[j]);
            hi[j] = hi[j].max(s.features[j]);
        }
    }
    let rest: Vec<f64> = (0..d).map(|j| rng.gen_range(lo[j]..=hi[j])).collect();
    let mut grid = Vec::with_capacity(100);
    for a in 0..10 {
        for b in 0..10 {
            let mut x = rest.clone();
            x[0] = lo[0] - 0.2 + (hi[0] - lo[0] + 0.4) * a as f64 / 9.0;
            x[1] = lo[1] - 0.2 + (hi[1] - lo[1] + 0.4) * b as f64 / 9.0;
            grid.push(x);
        }
    }
    grid
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn assert_svm_kkt(model: &SvmModel, ds: &Dataset) {
    let kkt = svm_kkt_violation(model, ds).unwrap();
    let eq = model.diagnostics().unwrap().equality_residual;
    assert!(kkt < 1e-3, "SVM KKT violation {kkt}");
    assert!(eq.abs() < 1e-6, "SVM equality residual {eq}");
}

pub fn assert_svr_kkt(model: &SvrModel, ds: &Dataset) {
    let kkt = svr_kkt_violation(model, ds).unwrap();
    let eq = model.diagnostics().unwrap().equality_residual;
    assert!(kkt < 1e-3, "SVR KKT violation {kkt}");
    assert!(eq.abs() < 1e-6, "SVR equality residual {eq}");
}

/// One seeded C-SVC equivalence case: SMO against the QP oracle on at most
/// eight samples. Returns the objective difference.
pub fn svc_oracle_case(case: u64) -> Result<f64, String> {
    let mut r = rng(1000 + case);
    let n = r.gen_range(2..=8);
    let dims = r.gen_range(2..=5);
    let ds = random_classification(&mut r, n, dims);
    let c = [0.5, 1.0, 10.0, 100.0][r.gen_range(0..4)];
    let gamma = r.gen_range(0.2..4.0);
    let balanced = r.gen_bool(0.5);
    let (model, sol) = train_svm_traced(&ds, &SvmParams::new(c, gamma, balanced), false).map_err(|e| e.to_string())?;
    assert_svm_kkt(&model, &ds);
    let oracle = OracleSvc::fit(&ds, c, gamma, balanced, 1e-8);
    if oracle.gap >= 1e-8 {
        return Err(format!("svc case {case}: oracle residual {:e}", oracle.gap));
    }
    let diff = (sol.objective - oracle.objective).abs();
    if diff >= 1e-3 {
        return Err(format!("svc case {case}: objective {} vs {}", sol.objective, oracle.objective));
    }
    for x in probe_grid(&mut r, &ds) {
        let ours = predict_svm(&model, &x).map_err(|e| e.to_string())?;
        if ours.label != Label::from_sign(oracle.decision(&x)) {
            return Err(format!("svc case {case}: label differs at {x:?}"));
        }
    }
    Ok(diff)
}

/// One seeded epsilon-SVR equivalence case. The oracle residual is measured
/// relative to the targets, which are in cm.
pub fn svr_oracle_case(case: u64) -> Result<f64, String> {
    let mut r = rng(5000 + case);
    let n = r.gen_range(2..=8);
    let dims = r.gen_range(2..=5);
    let ds = random_regression(&mut r, n, dims);
    let c = [1.0, 10.0, 100.0][r.gen_range(0..3)];
    let gamma = r.gen_range(0.2..4.0);
    let (model, sol) = train_svr_traced(&ds, &SvrParams::new(c, gamma, 5.0), false).map_err(|e| e.to_string())?;
    assert_svr_kkt(&model, &ds);
    let scale = ds.samples().iter().map(|s| s.distance.unwrap().abs()).fold(1.0, f64::max);
    let oracle = OracleSvr::fit(&ds, c, gamma, 5.0, 1e-8 * scale);
    if oracle.gap >= 1e-8 * scale {
        return Err(format!("svr case {case}: oracle residual {:e}", oracle.gap));
    }
    let diff = (sol.objective - oracle.objective).abs();
    if diff >= 1e-3 {
        return Err(format!("svr case {case}: objective {} vs {}", sol.objective, oracle.objective));
    }
    for x in probe_grid(&mut r, &ds) {
        let ours = model.predict_distance(&x).map_err(|e| e.to_string())?;
        let theirs = oracle.predict(&x);
        let label = if theirs <= 50.0 { Label::Positive } else { Label::Negative };
        if (ours - theirs).abs() >= 1e-2 || classify_svr(&model, &x, 50.0).map_err(|e| e.to_string())? != label {
            return Err(format!("svr case {case}: prediction {ours} vs {theirs}"));
        }
    }
    Ok(diff)
}

/// `(tp, fp, fn, tn)` with precision, recall, F-measure and accuracy worked
/// out by hand as fractions; `None` is undefined.
#[allow(clippy::type_complexity)]
pub const HAND_METRICS: [((usize, usize, usize, usize), [Option<f64>; 4]); 12] = [
    ((5, 5, 5, 5), [Some(0.5), Some(0.5), Some(0.5), Some(0.5)]),
    ((3, 1, 2, 4), [Some(0.75), Some(0.6), Some(2.0 / 3.0), Some(0.7)]),
    ((8, 2, 0, 0), [Some(0.8), Some(1.0), Some(8.0 / 9.0), Some(0.8)]),
    ((1, 0, 9, 10), [Some(1.0), Some(0.1), Some(2.0 / 11.0), Some(0.55)]),
    ((0, 0, 4, 16), [None, Some(0.0), None, Some(0.8)]),
    ((0, 3, 0, 7), [Some(0.0), None, None, Some(0.7)]),
    ((0, 0, 0, 9), [None, None, None, Some(1.0)]),
    ((6, 0, 0, 0), [Some(1.0), Some(1.0), Some(1.0), Some(1.0)]),
    ((2, 6, 2, 10), [Some(0.25), Some(0.5), Some(1.0 / 3.0), Some(0.6)]),
    ((0, 5, 5, 0), [Some(0.0), Some(0.0), None, Some(0.0)]),
    ((7, 3, 1, 39), [Some(0.7), Some(0.875), Some(7.0 / 9.0), Some(0.92)]),
    ((4, 4, 12, 30), [Some(0.5), Some(0.25), Some(1.0 / 3.0), Some(0.68)]),
];

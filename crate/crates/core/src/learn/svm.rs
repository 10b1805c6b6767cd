use crate::features::{fit_scaler, Dataset, Label, MinMaxScaler};

use super::kernel::{rbf_unchecked, KernelCache, KernelParams};
use super::smo::{DualProblem, SmoConfig, SmoSolution};
use super::{check_positive, FitDiagnostics, LearnError, Prediction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    /// Scale each class's box bound by `n / (2 n_y)`.
    pub balanced: bool,
    pub smo: SmoConfig,
}

impl SvmParams {
    pub fn new(c: f64, gamma: f64, balanced: bool) -> Self {
        Self {
            c,
            gamma,
            balanced,
            smo: SmoConfig::default(),
        }
    }
}

/// Trained C-SVC with RBF kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub(crate) support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub(crate) coefs: Vec<f64>,
    pub(crate) bias: f64,
    pub(crate) kernel: KernelParams,
    pub(crate) c: f64,
    /// `(w_-, w_+)`.
    pub(crate) class_weights: (f64, f64),
    pub(crate) scaler: MinMaxScaler,
    /// Training-set index of each support vector; empty for loaded models.
    pub(crate) sv_indices: Vec<usize>,
    pub(crate) diagnostics: Option<FitDiagnostics>,
}

impl SvmModel {
    pub fn support_vectors(&self) -> &[Vec<f64>] {
        &self.support_vectors
    }
    pub fn coefs(&self) -> &[f64] {
        &self.coefs
    }
    pub fn bias(&self) -> f64 {
        self.bias
    }
    pub fn kernel(&self) -> KernelParams {
        self.kernel
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn class_weights(&self) -> (f64, f64) {
        self.class_weights
    }
    pub fn scaler(&self) -> &MinMaxScaler {
        &self.scaler
    }
    pub fn sv_indices(&self) -> &[usize] {
        &self.sv_indices
    }
    pub fn diagnostics(&self) -> Option<&FitDiagnostics> {
        self.diagnostics.as_ref()
    }

    /// Box bound for a sample of class `label`.
    pub fn upper_bound(&self, label: Label) -> f64 {
        match label {
            Label::Negative => self.c * self.class_weights.0,
            Label::Positive => self.c * self.class_weights.1,
        }
    }

    /// Decision value on an already scaled vector.
    pub fn decision_scaled(&self, z: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefs)
            .map(|(sv, c)| c * rbf_unchecked(sv, z, self.kernel.gamma))
            .sum::<f64>()
            + self.bias
    }
}

/// Per-class weights `(w_-, w_+)`: `n / (2 n_y)` when balanced, else 1.
pub fn class_weights(labels: &[Label], balanced: bool) -> Result<(f64, f64), LearnError> {
    let n_pos = labels.iter().filter(|l| **l == Label::Positive).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(LearnError::SingleClass);
    }
    if !balanced {
        return Ok((1.0, 1.0));
    }
    let n = labels.len() as f64;
    Ok((n / (2.0 * n_neg as f64), n / (2.0 * n_pos as f64)))
}

pub(crate) fn scale_dataset(ds: &Dataset) -> Result<(MinMaxScaler, Vec<Vec<f64>>), LearnError> {
    let scaler = fit_scaler(ds.samples().iter().map(|s| s.features.as_slice()))?;
    let scaled = ds
        .samples()
        .iter()
        .map(|s| scaler.apply(&s.features))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((scaler, scaled))
}

/// Trains a C-SVC by SMO on min-max scaled features.
pub fn train_svm(ds: &Dataset, params: &SvmParams) -> Result<SvmModel, LearnError> {
    train_svm_traced(ds, params, false).map(|(m, _)| m)
}

/// Like [`train_svm`] but also returns the raw dual solution, optionally with
/// the objective trace.
pub fn train_svm_traced(
    ds: &Dataset,
    params: &SvmParams,
    record_trace: bool,
) -> Result<(SvmModel, SmoSolution), LearnError> {
    check_positive("C", params.c)?;
    let kernel = KernelParams::new(params.gamma)?;
    let labels = ds.labels();
    let weights = class_weights(&labels, params.balanced)?;
    let (scaler, scaled) = scale_dataset(ds)?;

    let y: Vec<f64> = labels.iter().map(|l| l.as_f64()).collect();
    let upper: Vec<f64> = labels
        .iter()
        .map(|l| match l {
            Label::Negative => params.c * weights.0,
            Label::Positive => params.c * weights.1,
        })
        .collect();
    let mut cache = KernelCache::new(&scaled, kernel.gamma);
    let problem = DualProblem {
        kernel: &mut cache,
        p: vec![-1.0; y.len()],
        y: y.clone(),
        upper,
    };
    let sol = problem.solve(&params.smo, record_trace)?;

    let mut support_vectors = Vec::new();
    let mut coefs = Vec::new();
    let mut sv_indices = Vec::new();
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(scaled[i].clone());
            coefs.push(a * y[i]);
            sv_indices.push(i);
        }
    }
    let equality: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
    let model = SvmModel {
        support_vectors,
        coefs,
        bias: -sol.rho,
        kernel,
        c: params.c,
        class_weights: weights,
        scaler,
        sv_indices,
        diagnostics: Some(FitDiagnostics {
            iterations: sol.iterations,
            kkt_violation: sol.violation,
            equality_residual: equality,
            objective: sol.objective,
        }),
    };
    Ok((model, sol))
}

/// Label and decision value for a raw (unscaled) feature vector. A decision
/// value of exactly zero maps to `-1`.
pub fn predict_svm(model: &SvmModel, x: &[f64]) -> Result<Prediction, LearnError> {
    let z = model.scaler.apply(x)?;
    let score = model.decision_scaled(&z);
    Ok(Prediction {
        label: Label::from_sign(score),
        score,
    })
}

/// Largest KKT violation of `model` on its own training set, recomputed from
/// the stored coefficients and decision values (independent of the solver's
/// gradient bookkeeping). Needs a freshly trained model.
pub fn svm_kkt_violation(model: &SvmModel, ds: &Dataset) -> Result<f64, LearnError> {
    if model.sv_indices.is_empty() && !model.coefs.is_empty() {
        return Err(LearnError::CorruptSection(
            "model has no training indices".into(),
        ));
    }
    let mut alpha = vec![0.0; ds.len()];
    for (&i, &c) in model.sv_indices.iter().zip(&model.coefs) {
        alpha[i] = c / ds.samples()[i].label.as_f64();
    }
    let mut worst: f64 = 0.0;
    for (s, &a) in ds.samples().iter().zip(&alpha) {
        let upper = model.upper_bound(s.label);
        let margin = s.label.as_f64() * predict_svm(model, &s.features)?.score;
        let v = if a <= 0.0 {
            (1.0 - margin).max(0.0)
        } else if a >= upper * (1.0 - 1e-12) {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

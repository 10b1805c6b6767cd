use crate::features::{Dataset, Label, MinMaxScaler};

use super::kernel::{rbf_unchecked, KernelCache, KernelParams};
use super::smo::{DualProblem, SmoConfig, SmoSolution};
use super::svm::scale_dataset;
use super::{check_positive, FitDiagnostics, LearnError, Prediction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrParams {
    pub c: f64,
    pub gamma: f64,
    /// Half-width of the insensitive tube, in target units (cm).
    pub epsilon: f64,
    pub smo: SmoConfig,
}

impl SvrParams {
    pub fn new(c: f64, gamma: f64, epsilon: f64) -> Self {
        Self {
            c,
            gamma,
            epsilon,
            smo: SmoConfig::default(),
        }
    }
}

/// Trained epsilon-SVR predicting obstacle distance in centimetres.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub(crate) support_vectors: Vec<Vec<f64>>,
    /// `alpha_i - alpha*_i` per support vector.
    pub(crate) coefs: Vec<f64>,
    pub(crate) bias: f64,
    pub(crate) kernel: KernelParams,
    pub(crate) c: f64,
    pub(crate) epsilon: f64,
    /// Distance cutoff used when the regressor is scored as a classifier.
    pub(crate) threshold_cm: f64,
    pub(crate) scaler: MinMaxScaler,
    pub(crate) sv_indices: Vec<usize>,
    pub(crate) diagnostics: Option<FitDiagnostics>,
}

impl SvrModel {
    pub fn coefs(&self) -> &[f64] {
        &self.coefs
    }
    pub fn bias(&self) -> f64 {
        self.bias
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn threshold_cm(&self) -> f64 {
        self.threshold_cm
    }
    pub fn sv_indices(&self) -> &[usize] {
        &self.sv_indices
    }
    pub fn diagnostics(&self) -> Option<&FitDiagnostics> {
        self.diagnostics.as_ref()
    }

    /// Predicted distance for a raw feature vector.
    pub fn predict_distance(&self, x: &[f64]) -> Result<f64, LearnError> {
        let z = self.scaler.apply(x)?;
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.coefs)
            .map(|(sv, c)| c * rbf_unchecked(sv, &z, self.kernel.gamma))
            .sum::<f64>()
            + self.bias)
    }

    /// Classification view: score is `threshold - predicted distance`.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction, LearnError> {
        let d = self.predict_distance(x)?;
        Ok(Prediction {
            label: label_for_distance(d, self.threshold_cm),
            score: self.threshold_cm - d,
        })
    }
}

fn label_for_distance(d: f64, threshold_cm: f64) -> Label {
    if d <= threshold_cm {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// `+1` when the predicted distance is at or below `threshold_cm`.
pub fn classify_svr(model: &SvrModel, x: &[f64], threshold_cm: f64) -> Result<Label, LearnError> {
    Ok(label_for_distance(model.predict_distance(x)?, threshold_cm))
}

pub fn train_svr(ds: &Dataset, params: &SvrParams) -> Result<SvrModel, LearnError> {
    train_svr_traced(ds, params, false).map(|(m, _)| m)
}

pub fn train_svr_traced(
    ds: &Dataset,
    params: &SvrParams,
    record_trace: bool,
) -> Result<(SvrModel, SmoSolution), LearnError> {
    check_positive("C", params.c)?;
    check_positive("epsilon", params.epsilon)?;
    let kernel = KernelParams::new(params.gamma)?;
    if ds.is_empty() {
        return Err(LearnError::Feature(crate::features::FeatureError::EmptyTraining));
    }
    let targets = ds
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| s.distance.ok_or(LearnError::MissingDistance { index: i }))
        .collect::<Result<Vec<f64>, _>>()?;
    let (scaler, scaled) = scale_dataset(ds)?;
    let n = targets.len();

    let mut y = vec![1.0; n];
    y.extend(std::iter::repeat(-1.0).take(n));
    let mut p: Vec<f64> = targets.iter().map(|z| params.epsilon - z).collect();
    p.extend(targets.iter().map(|z| params.epsilon + z));
    let mut cache = KernelCache::new(&scaled, kernel.gamma);
    let problem = DualProblem {
        kernel: &mut cache,
        y,
        p,
        upper: vec![params.c; 2 * n],
    };
    let sol = problem.solve(&params.smo, record_trace)?;

    let mut support_vectors = Vec::new();
    let mut coefs = Vec::new();
    let mut sv_indices = Vec::new();
    let mut coef_sum = 0.0;
    for i in 0..n {
        let c = sol.alpha[i] - sol.alpha[i + n];
        coef_sum += c;
        if c != 0.0 {
            support_vectors.push(scaled[i].clone());
            coefs.push(c);
            sv_indices.push(i);
        }
    }
    let model = SvrModel {
        support_vectors,
        coefs,
        bias: -sol.rho,
        kernel,
        c: params.c,
        epsilon: params.epsilon,
        threshold_cm: ds.threshold_cm(),
        scaler,
        sv_indices,
        diagnostics: Some(FitDiagnostics {
            iterations: sol.iterations,
            kkt_violation: sol.violation,
            equality_residual: coef_sum,
            objective: sol.objective,
        }),
    };
    Ok((model, sol))
}

/// Largest KKT violation of a freshly trained SVR on its training set,
/// recomputed from coefficients and predictions.
pub fn svr_kkt_violation(model: &SvrModel, ds: &Dataset) -> Result<f64, LearnError> {
    let mut coef = vec![0.0; ds.len()];
    for (&i, &c) in model.sv_indices.iter().zip(&model.coefs) {
        coef[i] = c;
    }
    let at_upper = |a: f64| a >= model.c * (1.0 - 1e-12);
    let mut worst: f64 = 0.0;
    for (i, s) in ds.samples().iter().enumerate() {
        let z = s.distance.ok_or(LearnError::MissingDistance { index: i })?;
        let r = z - model.predict_distance(&s.features)?;
        let (a, a_star) = (coef[i].max(0.0), (-coef[i]).max(0.0));
        let eps = model.epsilon;
        // alpha pushes predictions up (residual above the tube), alpha* down
        let v_up = if a <= 0.0 {
            (r - eps).max(0.0)
        } else if at_upper(a) {
            (eps - r).max(0.0)
        } else {
            (r - eps).abs()
        };
        let v_down = if a_star <= 0.0 {
            (-r - eps).max(0.0)
        } else if at_upper(a_star) {
            (eps + r).max(0.0)
        } else {
            (-r - eps).abs()
        };
        worst = worst.max(v_up).max(v_down);
    }
    Ok(worst)
}

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::{Dataset, Label, MinMaxScaler};

use super::svm::{class_weights, scale_dataset};
use super::{LearnError, Prediction};

pub const DEFAULT_MAX_EPOCHS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceptronParams {
    pub max_epochs: usize,
    pub balanced: bool,
}

impl Default for PerceptronParams {
    fn default() -> Self {
        Self {
            max_epochs: DEFAULT_MAX_EPOCHS,
            balanced: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronModel {
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: f64,
    pub(crate) epochs_run: usize,
    pub(crate) updates: usize,
    pub(crate) scaler: MinMaxScaler,
}

impl PerceptronModel {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn bias(&self) -> f64 {
        self.bias
    }
    pub fn epochs_run(&self) -> usize {
        self.epochs_run
    }
    /// Total number of weight updates made during training.
    pub fn updates(&self) -> usize {
        self.updates
    }
    pub fn scaler(&self) -> &MinMaxScaler {
        &self.scaler
    }

    pub fn decision_scaled(&self, z: &[f64]) -> f64 {
        self.weights.iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction, LearnError> {
        let score = self.decision_scaled(&self.scaler.apply(x)?);
        Ok(Prediction {
            label: Label::from_sign(score),
            score,
        })
    }
}

/// One perceptron step: on a mistake (`y * f(x) <= 0`) move by `rate * y * x`.
/// Returns whether an update happened.
pub fn perceptron_step(
    weights: &mut [f64],
    bias: &mut f64,
    x: &[f64],
    label: Label,
    rate: f64,
) -> bool {
    let y = label.as_f64();
    let f = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + *bias;
    if y * f > 0.0 {
        return false;
    }
    for (w, v) in weights.iter_mut().zip(x) {
        *w += rate * y * v;
    }
    *bias += rate * y;
    true
}

/// Online perceptron on scaled features with per-class learning rates
/// `n / (2 n_y)` when balanced. Sample order is reshuffled every epoch.
pub fn train_perceptron(
    ds: &Dataset,
    params: &PerceptronParams,
    seed: u64,
) -> Result<PerceptronModel, LearnError> {
    if params.max_epochs == 0 {
        return Err(LearnError::NonPositiveHyperparameter {
            name: "max_epochs",
            value: 0.0,
        });
    }
    let labels = ds.labels();
    let (rate_neg, rate_pos) = class_weights(&labels, params.balanced)?;
    let (scaler, scaled) = scale_dataset(ds)?;
    let mut weights = vec![0.0; ds.dims()];
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut epochs_run = 0;
    let mut updates = 0;
    for _ in 0..params.max_epochs {
        epochs_run += 1;
        order.shuffle(&mut rng);
        let mut epoch_updates = 0;
        for &i in &order {
            let rate = match labels[i] {
                Label::Negative => rate_neg,
                Label::Positive => rate_pos,
            };
            if perceptron_step(&mut weights, &mut bias, &scaled[i], labels[i], rate) {
                epoch_updates += 1;
            }
        }
        updates += epoch_updates;
        if epoch_updates == 0 {
            break;
        }
    }
    Ok(PerceptronModel {
        weights,
        bias,
        epochs_run,
        updates,
        scaler,
    })
}

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::Label;

use super::EvalError;

/// Default number of folds.
pub const DEFAULT_K: usize = 8;

/// Stratified k-fold partition.
///
/// Each class is shuffled with the seed and dealt round-robin over the folds;
/// the positive class continues dealing where the negative class stopped so
/// overall fold sizes also differ by at most one. Indices inside a fold are
/// sorted.
pub fn kfold_indices(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidK(k));
    }
    if labels.len() < k {
        return Err(EvalError::TooFewSamples {
            samples: labels.len(),
            k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next_fold = 0usize;
    for class in [Label::Negative, Label::Positive] {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < k {
            return Err(EvalError::TooFewPerClass {
                label: class,
                count: members.len(),
                k,
            });
        }
        members.shuffle(&mut rng);
        for idx in members {
            folds[next_fold].push(idx);
            next_fold = (next_fold + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

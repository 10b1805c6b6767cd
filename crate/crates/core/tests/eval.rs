mod common;

use flownav::eval::{cross_validate, kfold_indices, metrics_from_cm, Cell, ConfusionMatrix, EvalError, MetricName};
use flownav::features::{Dataset, Label, LabeledSample};
use flownav::registry::{LearnerOptions, LearnerRegistry};
use proptest::prelude::*;

fn labels(n: usize, positives: usize) -> Vec<Label> {
    (0..n)
        .map(|i| if i < positives { Label::Positive } else { Label::Negative })
        .collect()
}

#[test]
fn metrics_match_hand_computed_values() {
    for ((tp, fp, fn_, tn), expected) in common::HAND_METRICS {
        let m = metrics_from_cm(&ConfusionMatrix::new(tp, fp, fn_, tn));
        for (name, want) in MetricName::ALL.into_iter().zip(expected) {
            match (m.get(name), want) {
                (Some(got), Some(w)) => assert!((got - w).abs() < 1e-12, "{:?} {}: {got} vs {w}", (tp, fp, fn_, tn), name.as_str()),
                (got, w) => assert_eq!(got, w, "{:?} {}", (tp, fp, fn_, tn), name.as_str()),
            }
        }
    }
}

#[test]
fn undefined_precision_renders_as_dash() {
    let m = metrics_from_cm(&ConfusionMatrix::new(0, 0, 4, 16));
    assert_eq!(Cell(m.precision).to_string(), "-");
    assert_eq!(Cell(m.f_measure).to_string(), "-");
    assert_eq!(Cell(m.recall).to_string(), "0.000000");
}

#[test]
fn fold_preconditions() {
    assert!(matches!(kfold_indices(&labels(10, 5), 1, 0), Err(EvalError::InvalidK(1))));
    assert!(matches!(kfold_indices(&labels(5, 3), 8, 0), Err(EvalError::TooFewSamples { .. })));
    assert!(matches!(kfold_indices(&labels(40, 3), 8, 0), Err(EvalError::TooFewPerClass { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn folds_are_disjoint_covering_and_stratified(k in 2usize..12, extra_pos in 0usize..40,
                                                  extra_neg in 0usize..60, seed in any::<u64>()) {
        let (pos, neg) = (k + extra_pos, k + extra_neg);
        let mut lab = labels(pos + neg, pos);
        // interleave so positives are not a prefix
        let shift = seed as usize % lab.len();
        lab.rotate_left(shift);
        let folds = kfold_indices(&lab, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut seen = vec![0u32; lab.len()];
        for f in &folds {
            for &i in f {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        let count = |f: &Vec<usize>, l: Label| f.iter().filter(|&&i| lab[i] == l).count();
        for l in [Label::Positive, Label::Negative] {
            let per: Vec<usize> = folds.iter().map(|f| count(f, l)).collect();
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
        let sizes: Vec<usize> = folds.iter().map(|f| f.len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(&folds, &kfold_indices(&lab, k, seed).unwrap());
    }
}

fn blobs(n: usize) -> Dataset {
    let mut r = common::rng(7);
    common::random_classification(&mut r, n, 3)
}

#[test]
fn cross_validation_does_not_depend_on_jobs() {
    let ds = blobs(48);
    let reg = LearnerRegistry::builtin();
    for name in ["svm", "perceptron"] {
        let learner = reg.create(name, &LearnerOptions::default()).unwrap();
        let one = cross_validate(&ds, learner.as_ref(), 4, 3, 1).unwrap();
        let four = cross_validate(&ds, learner.as_ref(), 4, 3, 4).unwrap();
        assert_eq!(one.to_csv(), four.to_csv());
        assert_eq!(one.confusions.iter().map(|c| c.total()).sum::<usize>(), ds.len());
    }
}

#[test]
fn svr_report_renders_undefined_cells() {
    // every distance is far, so the regressor never predicts an obstacle
    let samples = (0..24)
        .map(|i| {
            let d = if i % 4 == 0 { 45.0 } else { 300.0 + i as f64 };
            let label = if d <= 50.0 { Label::Positive } else { Label::Negative };
            LabeledSample::new(vec![i as f64 % 3.0, 1.0], label, Some(d))
        })
        .collect();
    let ds = Dataset::new(samples, None, 50.0).unwrap();
    let learner = LearnerRegistry::builtin().create("svr", &LearnerOptions::default()).unwrap();
    let report = cross_validate(&ds, learner.as_ref(), 3, 1, 1).unwrap();
    let table = report.to_table();
    assert!(table.contains(" -"), "{table}");
    assert!(report.to_csv().lines().skip(1).all(|l| l.split(',').count() == 5));
}

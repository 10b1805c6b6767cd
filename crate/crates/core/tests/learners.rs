mod common;

use common::*;
use flownav::features::Label;
use flownav::learn::{train_perceptron, train_svm, train_svr, PerceptronParams, SvmParams, SvrParams};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn svc_matches_qp_oracle() {
    for case in 0..50 {
        svc_oracle_case(case).unwrap();
    }
}

#[test]
fn svr_matches_qp_oracle() {
    for case in 0..20 {
        svr_oracle_case(case).unwrap();
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trained_svm_satisfies_kkt(seed in any::<u64>(), n in 4usize..40, dims in 1usize..6,
                                 c in 0.05f64..200.0, gamma in 0.01f64..10.0, balanced in any::<bool>()) {
        let ds = random_classification(&mut rng(seed), n, dims);
        let model = train_svm(&ds, &SvmParams::new(c, gamma, balanced)).unwrap();
        assert_svm_kkt(&model, &ds);
        for (a, s) in model.coefs().iter().zip(model.sv_indices()) {
            let label = ds.samples()[*s].label;
            prop_assert!(a.abs() <= model.upper_bound(label) + 1e-12);
        }
    }

    #[test]
    fn trained_svr_satisfies_kkt(seed in any::<u64>(), n in 2usize..40, dims in 1usize..6,
                                 c in 0.5f64..200.0, gamma in 0.01f64..10.0, epsilon in 0.5f64..20.0) {
        let ds = random_regression(&mut rng(seed), n, dims);
        let model = train_svr(&ds, &SvrParams::new(c, gamma, epsilon)).unwrap();
        assert_svr_kkt(&model, &ds);
        prop_assert!(model.coefs().iter().all(|a| a.abs() <= c + 1e-12));
    }

    #[test]
    fn perceptron_separates_separable_data(seed in any::<u64>(), n in 4usize..40) {
        let mut r = rng(seed);
        // labels follow the sign of a fixed hyperplane with a clear margin
        let samples = (0..n)
            .map(|i| {
                let pos = i % 2 == 0;
                let x0: f64 = if pos { r.gen_range(0.6..1.0) } else { r.gen_range(0.0..0.4) };
                let x1: f64 = r.gen_range(0.0..1.0);
                let label = if pos { Label::Positive } else { Label::Negative };
                flownav::features::LabeledSample::new(vec![x0, x1], label, None)
            })
            .collect();
        let ds = flownav::features::Dataset::new(samples, None, 50.0).unwrap();
        let params = PerceptronParams { max_epochs: 1000, ..PerceptronParams::default() };
        let model = train_perceptron(&ds, &params, seed).unwrap();
        for s in ds.samples() {
            prop_assert_eq!(model.predict(&s.features).unwrap().label, s.label);
        }
    }
}

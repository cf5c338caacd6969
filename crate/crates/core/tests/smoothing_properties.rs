use proptest::prelude::*;
use semisup_robust::gaussian_model::{Label, LinearClassifier};
use semisup_robust::rst::{smoothed_predict_exact, LogisticModel};
use semisup_robust::smoothing::{certify, CertifyOutcome, SmoothingConfig};
use semisup_robust::statkit::{inverse_gaussian_cdf, split_stream};

/// A point whose smoothed vote for `+1` under a linear classifier is exactly
/// `p`.
fn point_with_vote(p: f64, sigma: f64) -> Vec<f64> {
    vec![sigma * inverse_gaussian_cdf(p).unwrap(), 0.3]
}

#[test]
fn analytic_vote_is_as_constructed() {
    let sigma = 0.25;
    let x = point_with_vote(0.9, sigma);
    let (label, p) = smoothed_predict_exact(&LogisticModel::new(vec![1.0, 0.0]), &x, sigma).unwrap();
    assert_eq!(label, Label::Pos);
    assert!((p - 0.9).abs() < 1e-12);
}

/// Fewer runs and estimation draws than the full soundness check, same
/// one-sided bound.
#[test]
fn radius_rarely_exceeds_the_true_radius() {
    let cfg = SmoothingConfig {
        n_estimation: 2000,
        conf_alpha: 0.01,
        ..SmoothingConfig::default()
    };
    let clf = LinearClassifier::new(vec![1.0, 0.0]);
    let x = point_with_vote(0.9, cfg.noise_sigma);
    let true_radius = cfg.noise_sigma * inverse_gaussian_cdf(0.9).unwrap();
    let runs = 400;
    let mut over = 0;
    for i in 0..runs {
        let r = certify(&clf, &x, &cfg, &split_stream(90, i)).unwrap();
        assert_eq!(matches!(r.outcome, CertifyOutcome::Abstain), r.p_lower <= 0.5);
        if r.radius_for(Label::Pos).is_some_and(|rad| rad > true_radius) {
            over += 1;
        }
    }
    let limit = 5.0 * cfg.conf_alpha + 3.0 * (cfg.conf_alpha / runs as f64).sqrt();
    assert!(over as f64 / runs as f64 <= limit, "{over} of {runs}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn abstains_exactly_when_bound_is_at_most_half(
        offset in -0.6f64..0.6,
        seed in 0u64..10_000,
    ) {
        let cfg = SmoothingConfig { n0_selection: 20, n_estimation: 300, ..SmoothingConfig::default() };
        let clf = LinearClassifier::new(vec![1.0, -1.0]);
        let r = certify(&clf, &[offset, 0.0], &cfg, &split_stream(seed, 0)).unwrap();
        match r.outcome {
            CertifyOutcome::Abstain => prop_assert!(r.p_lower <= 0.5),
            CertifyOutcome::Certified { radius, .. } => {
                prop_assert!(r.p_lower > 0.5);
                prop_assert!(radius > 0.0);
            }
        }
        prop_assert!(r.votes_top <= cfg.n_estimation);
    }

    #[test]
    fn same_stream_same_result(seed in 0u64..1_000_000, idx in 0u64..1000) {
        let cfg = SmoothingConfig { n0_selection: 10, n_estimation: 100, ..SmoothingConfig::default() };
        let clf = LinearClassifier::new(vec![0.5, 1.0, -0.2]);
        let x = [0.1, -0.05, 0.3];
        let a = certify(&clf, &x, &cfg, &split_stream(seed, idx)).unwrap();
        let b = certify(&clf, &x, &cfg, &split_stream(seed, idx)).unwrap();
        prop_assert_eq!(a, b);
    }
}

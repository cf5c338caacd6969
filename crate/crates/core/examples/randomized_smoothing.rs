// Certifying a smoothed linear classifier, and the certified accuracy
// curve over a test set.

use semisup_robust::estimators::supervised_estimator;
use semisup_robust::gaussian_model::{canonical_model, sample_labeled, Label};
use semisup_robust::smoothing::{
    analytic_accuracy_curve, certified_accuracy_curve, certify, linf_radius_from_l2, CertifyOutcome, SmoothingConfig,
};
use semisup_robust::statkit::split_stream;

fn main() -> semisup_robust::Result<()> {
    let cfg = SmoothingConfig::default();

    // any closure can be the base classifier
    let first_coord = |x: &[f64]| Ok(if x[0] >= 0.0 { Label::Pos } else { Label::Neg });
    let r = certify(&first_coord, &[0.5, -3.0], &cfg, &split_stream(0, 0))?;
    match r.outcome {
        CertifyOutcome::Certified { label, radius } => {
            println!("x = (0.5, -3): {label:?} within l2 radius {radius:.4} (p_lower {:.4})", r.p_lower)
        }
        CertifyOutcome::Abstain => println!("abstained"),
    }

    let model = canonical_model(4, 16, 0.1, false)?;
    let clf = supervised_estimator(&sample_labeled(&model, 20, &mut split_stream(1, 0)))?;
    let test = sample_labeled(&model, 100, &mut split_stream(1, 1));
    let points: Vec<_> = test.xs.into_iter().zip(test.ys).collect();
    let radii = [0.0, 0.25, 0.5, 0.75];
    let empirical = certified_accuracy_curve(&clf, &points, &radii, &cfg, &split_stream(1, 2))?;
    let analytic = analytic_accuracy_curve(&clf.theta, &points, &radii, cfg.noise_sigma)?;
    println!("radius  l_inf    certified  analytic");
    for ((r, acc), (_, exact)) in empirical.iter().zip(&analytic) {
        println!("{r:<6}  {:.4}   {acc:<9}  {exact}", linf_radius_from_l2(*r, 16));
    }
    println!("l2 0.435 in 3072 dims covers l_inf {:.5}", linf_radius_from_l2(0.435, 3072));
    Ok(())
}

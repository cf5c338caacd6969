// Self-training on materialized data next to the fast sampler that draws the
// same estimator from its exact law without building the dataset.

use semisup_robust::estimators::{fast_selftrain_sample, naive_selftrain_sample};
use semisup_robust::gaussian_model::{canonical_model, robust_error};
use semisup_robust::statkit::split_stream;

fn main() -> semisup_robust::Result<()> {
    let model = canonical_model(4, 50, 0.2, false)?;
    let trials = 500;
    let (mut naive, mut fast) = (0.0, 0.0);
    for t in 0..trials {
        let a = naive_selftrain_sample(&model, 10, 500, 1.0, &mut split_stream(3, t))?;
        let b = fast_selftrain_sample(&model, 10, 500, 1.0, &mut split_stream(4, t))?;
        naive += robust_error(&model, &a.final_classifier)?;
        fast += robust_error(&model, &b.final_classifier)?;
    }
    println!("mean robust error over {trials} trials");
    println!("  naive: {:.4}", naive / trials as f64);
    println!("  fast:  {:.4}", fast / trials as f64);

    // at a dimension where materializing the pool would not fit in memory
    let big = canonical_model(4, 755_000, 0.5, true)?;
    let r = fast_selftrain_sample(&big, 4, 125_123, 1.0, &mut split_stream(5, 0))?;
    println!(
        "d = 755000, 125123 unlabeled: robust error {:.2e}, agreement {:.3}",
        robust_error(&big, &r.final_classifier)?,
        r.pseudo_label_agreement.unwrap_or(f64::NAN)
    );
    Ok(())
}

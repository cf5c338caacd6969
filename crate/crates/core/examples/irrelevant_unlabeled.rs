// Unlabeled pools where only a fraction of the points carry signal.

use semisup_robust::estimators::{sample_mixture, sample_selftrain, SamplerPath};
use semisup_robust::gaussian_model::{canonical_model, robust_error};
use semisup_robust::statkit::split_stream;

fn main() -> semisup_robust::Result<()> {
    let model = canonical_model(4, 10_000, 0.5, true)?;

    let (pool, _) = sample_mixture(&model, 8, 0.25, &mut split_stream(0, 0))?;
    let relevant = pool.relevant.iter().filter(|&&r| r).count();
    println!("pool of {} with {relevant} relevant points", pool.len());

    let base = 15_000;
    for alpha in [1.0, 0.5, 0.25, 0.0] {
        let mut fixed = 0.0;
        let mut scaled = None;
        for t in 0..5 {
            let r = sample_selftrain(&model, 4, base, alpha, SamplerPath::Fast, &mut split_stream(1, t))?;
            fixed += robust_error(&model, &r.final_classifier)? / 5.0;
            if alpha > 0.0 {
                let n = (base as f64 / (alpha * alpha)).ceil() as usize;
                let r = sample_selftrain(&model, 4, n, alpha, SamplerPath::Fast, &mut split_stream(2, t))?;
                *scaled.get_or_insert(0.0) += robust_error(&model, &r.final_classifier)? / 5.0;
            }
        }
        let scaled = scaled.map_or("-".to_string(), |v: f64| format!("{v:.2e}"));
        println!("alpha {alpha:<4}: fixed pool {fixed:.2e}   pool / alpha^2 {scaled}");
    }
    Ok(())
}

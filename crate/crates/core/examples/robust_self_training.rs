// Robust training on 30 labels alone versus robust self-training with 3000
// pseudo-labeled points.

use semisup_robust::estimators::{sample_mixture, UnlabeledSet};
use semisup_robust::gaussian_model::{canonical_model, errors, sample_labeled};
use semisup_robust::rst::{robust_self_train, rst_train, RstConfig, StandardConfig};
use semisup_robust::statkit::split_stream;

fn main() -> semisup_robust::Result<()> {
    let model = canonical_model(5, 100, 0.4, false)?;
    let cfg = RstConfig {
        beta: 3.0,
        epsilon: 0.4,
        ..RstConfig::default()
    };
    let stage1 = StandardConfig::default();

    for seed in 0..3 {
        let rng = split_stream(seed, 0);
        let labeled = sample_labeled(&model, 30, &mut rng.substream(0));
        let (pool, _) = sample_mixture(&model, 3000, 1.0, &mut rng.substream(1))?;

        let only = rst_train(&labeled, (&UnlabeledSet::default(), &[]), &cfg, &mut rng.substream(3))?;
        let rst = robust_self_train(&labeled, &pool, &stage1, &cfg, &mut rng.substream(2))?;

        let (s0, r0) = errors(&model, &only.model.to_linear())?;
        let (s1, r1) = errors(&model, &rst.fit.model.to_linear())?;
        println!("seed {seed}: labels only  std {s0:.3} rob {r0:.3}   self-training  std {s1:.3} rob {r1:.3}");
    }
    Ok(())
}

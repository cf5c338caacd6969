// The worst-case KL regularizer of a linear logistic model: exact solution,
// projected gradient approximation, and the Gaussian-noise variant.

use semisup_robust::rst::{adversarial_reg_exact, adversarial_reg_pg, stability_reg, LogisticModel};
use semisup_robust::statkit::split_stream;

fn main() {
    let mut rng = split_stream(11, 0);
    let d = 8;
    let model = LogisticModel::new((0..d).map(|_| rng.standard_normal()).collect());
    let x: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
    let eps = 0.1;

    let exact = adversarial_reg_exact(&model, &x, eps);
    let pg = adversarial_reg_pg(&model, &x, eps, 200, eps / 4.0, &mut rng);
    println!("exact worst-case KL {:.8}", exact.value);
    println!("PG (200 steps)      {:.8}", pg.value);
    println!("score shift         {:+.4}", model.score(&exact.x_adv) - model.score(&x));

    let stab = stability_reg(&model, &x, 0.25, 1000, &mut rng);
    println!("noise KL            {:.6} ± {:.6}", stab.value, stab.std_error);
}

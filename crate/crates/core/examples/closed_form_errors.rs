// Standard and robust error of linear classifiers in the canonical Gaussian
// model, in closed form and by simulation.

use semisup_robust::gaussian_model::{canonical_model, errors, mc_error_estimate, LinearClassifier};
use semisup_robust::statkit::{q_function, split_stream};

fn main() -> semisup_robust::Result<()> {
    let (n0, d) = (4, 64);
    let model = canonical_model(n0, d, 0.1, false)?;

    // the Bayes-optimal direction
    let best = LinearClassifier::new(model.mu.clone());
    let (std_err, rob_err) = errors(&model, &best)?;
    println!("theta = mu:    standard {std_err:.5}  robust {rob_err:.5}");
    println!("               Q((d/n0)^(1/4)) = {:.5}", q_function((d as f64 / n0 as f64).powf(0.25)));

    // a noisy direction loses accuracy, and more of it under perturbation
    let mut rng = split_stream(1, 0);
    let theta: Vec<f64> = model.mu.iter().map(|m| m + 2.0 * rng.standard_normal()).collect();
    let noisy = LinearClassifier::new(theta);
    let (std_err, rob_err) = errors(&model, &noisy)?;
    let (mc_std, mc_rob) = mc_error_estimate(&model, &noisy, 50_000, &mut rng)?;
    println!("noisy theta:   standard {std_err:.5}  robust {rob_err:.5}");
    println!("  simulated:   standard {mc_std:.5}  robust {mc_rob:.5}");
    Ok(())
}

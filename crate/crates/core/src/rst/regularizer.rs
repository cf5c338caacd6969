//! Prediction-stability regularizers: the worst case over an ℓ∞ ball (exact
//! and by projected signed-gradient ascent) and the additive-Gaussian-noise
//! variant.
//!
//! All KL terms are `KL(p(·|x) ‖ p(·|x'))`, clean distribution first.

use super::logistic::{kl_scores, LogisticModel};
use crate::linalg::{axpy, dot, norm1, sign};
use crate::statkit::RngStream;

/// Regularizer value at a maximizing (or sampled) point, with the parameter
/// gradient obtained by holding that point fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversarialPoint {
    pub value: f64,
    pub x_adv: Vec<f64>,
}

/// `∂/∂θ KL(p(·|x) ‖ p(·|x'))` with `x'` held fixed.
pub fn kl_param_grad(model: &LogisticModel, x: &[f64], x_adv: &[f64]) -> (f64, Vec<f64>) {
    let k = kl_scores(model.score(x), model.score(x_adv));
    let mut g: Vec<f64> = x.iter().map(|v| k.d_clean * v).collect();
    axpy(k.d_adv, x_adv, &mut g);
    (k.value, g)
}

/// Exact inner maximization over `‖x' - x‖∞ ≤ ε`.
///
/// The perturbed score ranges over `[s - ε‖θ‖₁, s + ε‖θ‖₁]` and the KL is
/// convex in it with its minimum at `s`, so one of the two endpoints
/// `x ∓ ε·sign(θ)` attains the maximum. Ties go to `x - ε·sign(θ)`.
pub fn adversarial_reg_exact(model: &LogisticModel, x: &[f64], epsilon: f64) -> AdversarialPoint {
    let s = model.score(x);
    let reach = epsilon * norm1(&model.theta);
    let down = kl_scores(s, s - reach).value;
    let up = kl_scores(s, s + reach).value;
    let (value, dir) = if up > down { (up, 1.0) } else { (down, -1.0) };
    let x_adv = x
        .iter()
        .zip(&model.theta)
        .map(|(xi, ti)| xi + dir * epsilon * sign(*ti))
        .collect();
    AdversarialPoint { value, x_adv }
}

fn project_linf(point: &mut [f64], center: &[f64], epsilon: f64) {
    for (p, c) in point.iter_mut().zip(center) {
        *p = p.clamp(c - epsilon, c + epsilon);
    }
}

fn signed_ascent(
    model: &LogisticModel,
    x: &[f64],
    s_clean: f64,
    start: Vec<f64>,
    epsilon: f64,
    steps: usize,
    step_size: f64,
) -> (f64, Vec<f64>) {
    let mut cur = start;
    let mut best_val = kl_scores(s_clean, model.score(&cur)).value;
    let mut best = cur.clone();
    for _ in 0..steps {
        // ∇_x' KL = (q - p)·θ
        let d_adv = kl_scores(s_clean, model.score(&cur)).d_adv;
        for (c, t) in cur.iter_mut().zip(&model.theta) {
            let g = d_adv * t;
            if g > 0.0 {
                *c += step_size;
            } else if g < 0.0 {
                *c -= step_size;
            }
        }
        project_linf(&mut cur, x, epsilon);
        let v = kl_scores(s_clean, model.score(&cur)).value;
        if v > best_val {
            best_val = v;
            best = cur.clone();
        }
    }
    (best_val, best)
}

/// Projected signed-gradient ascent on `r(x') = KL(p(·|x) ‖ p(·|x'))` over
/// the ℓ∞ ball, returning the best iterate.
///
/// The ascent runs twice: from a uniform random start `x + δ` and from its
/// reflection `x - δ`. On a linear model the objective has one local maximum
/// on each side of `s`, and the reflected pair always covers both sides.
pub fn adversarial_reg_pg(
    model: &LogisticModel,
    x: &[f64],
    epsilon: f64,
    steps: usize,
    step_size: f64,
    rng: &mut RngStream,
) -> AdversarialPoint {
    let s = model.score(x);
    let delta: Vec<f64> = (0..x.len()).map(|_| epsilon * (2.0 * rng.uniform() - 1.0)).collect();
    let mut plus: Vec<f64> = x.to_vec();
    axpy(1.0, &delta, &mut plus);
    let mut minus: Vec<f64> = x.to_vec();
    axpy(-1.0, &delta, &mut minus);
    project_linf(&mut plus, x, epsilon);
    project_linf(&mut minus, x, epsilon);

    let (v1, p1) = signed_ascent(model, x, s, plus, epsilon, steps, step_size);
    let (v2, p2) = signed_ascent(model, x, s, minus, epsilon, steps, step_size);
    if v2 > v1 {
        AdversarialPoint { value: v2, x_adv: p2 }
    } else {
        AdversarialPoint { value: v1, x_adv: p1 }
    }
}

/// Monte Carlo estimate of `E_δ KL(p(·|x) ‖ p(·|x + δ))`, `δ ~ N(0, σ²I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityEstimate {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Standard error of `value` across the noise draws.
    pub std_error: f64,
}

pub fn stability_reg(
    model: &LogisticModel,
    x: &[f64],
    noise_sigma: f64,
    n_noise: usize,
    rng: &mut RngStream,
) -> StabilityEstimate {
    let d = x.len();
    let n_noise = n_noise.max(1);
    let s = model.score(x);
    let mut grad = vec![0.0; d];
    let mut noise = vec![0.0; d];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_noise {
        rng.fill_standard_normal(&mut noise);
        // θᵀ(x + δ) = s + σ·θᵀz
        let s_adv = s + noise_sigma * dot(&model.theta, &noise);
        let k = kl_scores(s, s_adv);
        sum += k.value;
        sum_sq += k.value * k.value;
        for j in 0..d {
            grad[j] += k.d_clean * x[j] + k.d_adv * (x[j] + noise_sigma * noise[j]);
        }
    }
    let n = n_noise as f64;
    let mean = sum / n;
    let var = if n_noise > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    for g in grad.iter_mut() {
        *g /= n;
    }
    StabilityEstimate {
        value: mean,
        grad,
        std_error: (var / n).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statkit::split_stream;

    fn random_instance(rng: &mut RngStream, d: usize) -> (LogisticModel, Vec<f64>, f64) {
        let mut theta = vec![0.0; d];
        let mut x = vec![0.0; d];
        rng.fill_standard_normal(&mut theta);
        rng.fill_standard_normal(&mut x);
        let eps = 0.05 + 0.3 * rng.uniform();
        (LogisticModel::new(theta), x, eps)
    }

    #[test]
    fn zero_radius_is_zero() {
        let m = LogisticModel::new(vec![1.0, -2.0]);
        let r = adversarial_reg_exact(&m, &[0.3, 0.1], 0.0);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.x_adv, vec![0.3, 0.1]);
        let pg = adversarial_reg_pg(&m, &[0.3, 0.1], 0.0, 5, 0.1, &mut split_stream(0, 0));
        assert_eq!(pg.value, 0.0);
    }

    #[test]
    fn tie_goes_to_minus_endpoint() {
        let m = LogisticModel::new(vec![1.0, -2.0]);
        let r = adversarial_reg_exact(&m, &[0.0, 0.0], 0.1);
        assert_eq!(r.x_adv, vec![-0.1, 0.1]);
        let s_down = kl_scores(0.0, -0.3).value;
        assert_eq!(r.value, s_down);
    }

    #[test]
    fn single_large_step_hits_a_corner() {
        let m = LogisticModel::new(vec![0.7, -1.1, 2.0]);
        let x = [0.2, 0.4, -0.3];
        let eps = 0.1;
        let r = adversarial_reg_pg(&m, &x, eps, 1, 10.0, &mut split_stream(1, 1));
        for (a, c) in r.x_adv.iter().zip(&x) {
            assert!(((a - c).abs() - eps).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_dominates_pg() {
        let mut rng = split_stream(2, 0);
        for _ in 0..100 {
            let (m, x, eps) = random_instance(&mut rng, 6);
            let exact = adversarial_reg_exact(&m, &x, eps);
            let pg = adversarial_reg_pg(&m, &x, eps, 200, eps / 10.0, &mut rng);
            assert!(pg.value <= exact.value * (1.0 + 1e-12));
            assert!((exact.value - pg.value) <= 1e-6 * exact.value);
        }
    }

    #[test]
    fn stability_degenerate_cases() {
        let m = LogisticModel::new(vec![1.0, 2.0]);
        let r = stability_reg(&m, &[0.5, 0.5], 0.0, 10, &mut split_stream(3, 3));
        assert_eq!(r.value, 0.0);
        let z = stability_reg(&LogisticModel::zeros(2), &[0.5, 0.5], 1.0, 10, &mut split_stream(3, 3));
        assert_eq!(z.value, 0.0);
        assert!(z.grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn stability_gradient_matches_finite_differences_with_common_noise() {
        let m = LogisticModel::new(vec![0.4, -0.9, 0.2]);
        let x = [1.0, 0.5, -0.2];
        let rng = split_stream(4, 4);
        let r = stability_reg(&m, &x, 0.5, 20, &mut rng.clone());
        for j in 0..3 {
            let h = 1e-6;
            let mut tp = m.theta.clone();
            tp[j] += h;
            let mut tm = m.theta.clone();
            tm[j] -= h;
            let vp = stability_reg(&LogisticModel::new(tp), &x, 0.5, 20, &mut rng.clone()).value;
            let vm = stability_reg(&LogisticModel::new(tm), &x, 0.5, 20, &mut rng.clone()).value;
            let fd = (vp - vm) / (2.0 * h);
            assert!((fd - r.grad[j]).abs() <= 1e-5 * r.grad[j].abs().max(1e-4), "{fd} {}", r.grad[j]);
        }
    }
}

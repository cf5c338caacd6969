//! Binary logistic model, log loss and Bernoulli KL divergence.

use crate::error::{Error, Result};
use crate::gaussian_model::Label;
use crate::linalg::{dot, norm2};
use crate::statkit::gaussian_cdf;

/// Probabilities inside KL terms are clamped to this band.
pub const PROB_CLAMP: f64 = 1e-12;

/// `p(y = +1 | x) = 1 / (1 + exp(-thetaᵀx))`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticModel {
    pub theta: Vec<f64>,
}

impl LogisticModel {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta }
    }

    pub fn zeros(d: usize) -> Self {
        Self::new(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.theta, x)
    }

    pub fn prob(&self, x: &[f64], y: Label) -> f64 {
        sigmoid(y.value() * self.score(x))
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        Label::from_sign(self.score(x))
    }
}

pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` without overflow.
pub fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

/// Value and parameter gradient of a per-example loss.
#[derive(Clone, Debug, PartialEq)]
pub struct LossGrad {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// `-ln p(y|x) = ln(1 + exp(-y·thetaᵀx))`, gradient `-y·x·p(-y|x)`.
pub fn standard_loss(model: &LogisticModel, x: &[f64], y: Label) -> LossGrad {
    let margin = y.value() * model.score(x);
    let coef = -y.value() * sigmoid(-margin);
    LossGrad {
        value: softplus(-margin),
        grad: x.iter().map(|xi| coef * xi).collect(),
    }
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// `KL(Bern(p) ‖ Bern(q))` after clamping both to `[1e-12, 1 - 1e-12]`.
pub fn kl_bernoulli(p: f64, q: f64) -> f64 {
    let (p, q) = (clamp_prob(p), clamp_prob(q));
    let (pc, qc) = (1.0 - p, 1.0 - q);
    p * (p / q).ln() + pc * (pc / qc).ln()
}

/// KL between the label distributions at scores `s` and `s_adv`, with its
/// partial derivatives in both scores.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreKl {
    pub value: f64,
    pub d_clean: f64,
    pub d_adv: f64,
}

/// `KL(p(·|s) ‖ p(·|s_adv))`. Complements are taken as `sigmoid(-s)` so
/// saturated scores keep their precision.
pub fn kl_scores(s: f64, s_adv: f64) -> ScoreKl {
    let (p, pc) = (sigmoid(s), sigmoid(-s));
    let (q, qc) = (sigmoid(s_adv), sigmoid(-s_adv));
    let (pk, pck) = (clamp_prob(p), clamp_prob(pc));
    let (qk, qck) = (clamp_prob(q), clamp_prob(qc));
    let log_pos = (pk / qk).ln();
    let log_neg = (pck / qck).ln();
    let value = pk * log_pos + pck * log_neg;

    let p_free = pk == p && pck == pc;
    let q_free = qk == q && qck == qc;
    // dKL/dp · dp/ds  and  dKL/dq · dq/ds_adv
    let d_clean = if p_free { p * pc * (log_pos - log_neg) } else { 0.0 };
    let d_adv = if q_free { q * pc - p * qc } else { 0.0 };
    ScoreKl {
        value,
        d_clean,
        d_adv,
    }
}

/// Smoothed-vote prediction of a linear base classifier under
/// `N(0, noise_sigma² I)` input noise, in closed form:
/// `P(+1) = Φ(thetaᵀx / (noise_sigma·‖theta‖))`.
///
/// Returns the majority label and its vote probability.
pub fn smoothed_predict_exact(model: &LogisticModel, x: &[f64], noise_sigma: f64) -> Result<(Label, f64)> {
    smoothed_vote(&model.theta, x, noise_sigma)
}

pub(crate) fn smoothed_vote(theta: &[f64], x: &[f64], noise_sigma: f64) -> Result<(Label, f64)> {
    if theta.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            got: x.len(),
        });
    }
    if !(noise_sigma > 0.0) {
        return Err(crate::error::invalid("noise_sigma must be positive"));
    }
    let n = norm2(theta);
    if n == 0.0 {
        return Err(Error::ZeroWeights);
    }
    let s = dot(theta, x);
    let label = Label::from_sign(s);
    let z = s.abs() / (noise_sigma * n);
    Ok((label, gaussian_cdf(z)))
}

//! Binary Gaussian model `y ~ Unif{-1, +1}`, `x | y ~ N(y·mu, sigma² I)`,
//! with exact standard and ℓ∞-robust error of linear classifiers.

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm1, norm2};
use crate::statkit::{q_function, RngStream};

/// Class label. `Neg < Pos` is the fixed order used for tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// `sign(v)` with `sign(0) = +1`.
    pub fn from_sign(v: f64) -> Self {
        if v >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn from_coin(heads: bool) -> Self {
        if heads {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Label::Neg => -1.0,
            Label::Pos => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Neg => -1,
            Label::Pos => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Neg => Label::Pos,
            Label::Pos => Label::Neg,
        }
    }
}

/// Problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianModel {
    pub mu: Vec<f64>,
    pub sigma: f64,
    pub epsilon: f64,
    /// Label budget the instance was generated for, when canonical.
    pub n0: Option<u64>,
}

impl GaussianModel {
    pub fn new(mu: Vec<f64>, sigma: f64, epsilon: f64) -> Result<Self> {
        if mu.is_empty() {
            return Err(invalid("dimension must be at least 1"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("sigma must be positive, got {sigma}")));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        Ok(Self {
            mu,
            sigma,
            epsilon,
            n0: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let mut m = Self::new(self.mu.clone(), self.sigma, epsilon)?;
        m.n0 = self.n0;
        Ok(m)
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        let mut m = Self::new(self.mu.clone(), sigma, self.epsilon)?;
        m.n0 = self.n0;
        Ok(m)
    }

    /// `true` when `mu` is exactly the all-ones vector, which lets hot paths
    /// replace `muᵀv` by a plain sum.
    fn mu_is_ones(&self) -> bool {
        self.mu.iter().all(|&m| m == 1.0)
    }

    /// `muᵀv`
    pub fn mu_dot(&self, v: &[f64]) -> f64 {
        if self.mu_is_ones() {
            v.iter().sum()
        } else {
            dot(&self.mu, v)
        }
    }
}

fn check_epsilon(epsilon: f64, allow_large_eps: bool) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if epsilon >= 0.5 && !allow_large_eps {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    Ok(())
}

/// Canonical instance: `mu` all-ones (so `‖mu‖² = d`) and
/// `sigma = (n0·d)^{1/4}`.
///
/// `epsilon >= 1/2` is outside the regime the sample-complexity statements
/// cover; it is rejected unless `allow_large_eps` is set.
pub fn canonical_model(n0: u64, d: usize, epsilon: f64, allow_large_eps: bool) -> Result<GaussianModel> {
    canonical_model_with_direction(n0, &vec![1.0; d], epsilon, allow_large_eps)
}

/// Canonical instance along an arbitrary nonzero direction, rescaled so that
/// `‖mu‖² = d`.
pub fn canonical_model_with_direction(
    n0: u64,
    direction: &[f64],
    epsilon: f64,
    allow_large_eps: bool,
) -> Result<GaussianModel> {
    if n0 == 0 {
        return Err(invalid("n0 must be at least 1"));
    }
    let d = direction.len();
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    check_epsilon(epsilon, allow_large_eps)?;
    let norm = norm2(direction);
    if norm == 0.0 || !norm.is_finite() {
        return Err(invalid("direction must be a finite nonzero vector"));
    }
    let scale = (d as f64).sqrt() / norm;
    let mu = if direction.iter().all(|&v| v == 1.0) {
        direction.to_vec()
    } else {
        direction.iter().map(|v| v * scale).collect()
    };
    let sigma = ((n0 as f64) * (d as f64)).powf(0.25);
    let mut model = GaussianModel::new(mu, sigma, epsilon)?;
    model.n0 = Some(n0);
    Ok(model)
}

/// `f(x) = sign(thetaᵀx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearClassifier {
    pub theta: Vec<f64>,
}

impl LinearClassifier {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.theta, x)
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        Label::from_sign(self.score(x))
    }

    pub fn negated(&self) -> Self {
        Self::new(self.theta.iter().map(|v| -v).collect())
    }
}

/// Labeled sample.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledSet {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<Label>,
}

impl LabeledSet {
    pub fn new(xs: Vec<Vec<f64>>, ys: Vec<Label>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(invalid(format!(
                "labeled set has {} inputs but {} labels",
                xs.len(),
                ys.len()
            )));
        }
        if let Some(first) = xs.first() {
            let d = first.len();
            if let Some(bad) = xs.iter().find(|x| x.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: bad.len(),
                });
            }
        }
        Ok(Self { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.xs.first().map(Vec::len)
    }
}

/// Draws one point into `x` and returns its label: the label first, then the
/// `d` noise coordinates in index order.
pub(crate) fn draw_point(model: &GaussianModel, label: Label, rng: &mut RngStream, x: &mut [f64]) {
    rng.fill_standard_normal(x);
    let y = label.value();
    for (xi, mi) in x.iter_mut().zip(&model.mu) {
        *xi = y * mi + model.sigma * *xi;
    }
}

/// `n` i.i.d. labeled draws.
pub fn sample_labeled(model: &GaussianModel, n: usize, rng: &mut RngStream) -> LabeledSet {
    let d = model.dim();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let y = Label::from_coin(rng.coin());
        let mut x = vec![0.0; d];
        draw_point(model, y, rng, &mut x);
        xs.push(x);
        ys.push(y);
    }
    LabeledSet { xs, ys }
}

/// Standardized margin `muᵀθ / (σ‖θ‖)` and the robust penalty
/// `ε‖θ‖₁ / (σ‖θ‖)`.
pub fn margin_terms(model: &GaussianModel, clf: &LinearClassifier) -> Result<(f64, f64)> {
    if clf.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: clf.dim(),
        });
    }
    let n2 = norm2(&clf.theta);
    if n2 == 0.0 {
        return Err(Error::ZeroWeights);
    }
    let denom = model.sigma * n2;
    let signal = model.mu_dot(&clf.theta) / denom;
    let penalty = model.epsilon * norm1(&clf.theta) / denom;
    Ok((signal, penalty))
}

/// `P(sign(xᵀθ) ≠ y) = Q(muᵀθ / (σ‖θ‖))`.
pub fn standard_error(model: &GaussianModel, clf: &LinearClassifier) -> Result<f64> {
    let (signal, _) = margin_terms(model, clf)?;
    Ok(q_function(signal))
}

/// Worst-case error under ℓ∞ perturbations of size ε:
/// `Q(muᵀθ/(σ‖θ‖) - ε‖θ‖₁/(σ‖θ‖))`.
pub fn robust_error(model: &GaussianModel, clf: &LinearClassifier) -> Result<f64> {
    let (signal, penalty) = margin_terms(model, clf)?;
    Ok(q_function(signal - penalty))
}

/// Both closed forms from one pass over θ.
pub fn errors(model: &GaussianModel, clf: &LinearClassifier) -> Result<(f64, f64)> {
    let (signal, penalty) = margin_terms(model, clf)?;
    Ok((q_function(signal), q_function(signal - penalty)))
}

/// Empirical standard and robust error rates over `n_samples` fresh draws.
///
/// A draw is robustly misclassified iff `y·xᵀθ - ε‖θ‖₁ < 0`, which is exactly
/// the outcome of the worst ℓ∞ perturbation `-ε·y·sign(θ)`.
pub fn mc_error_estimate(
    model: &GaussianModel,
    clf: &LinearClassifier,
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    if n_samples == 0 {
        return Err(invalid("n_samples must be at least 1"));
    }
    margin_terms(model, clf)?;
    let budget = model.epsilon * norm1(&clf.theta);
    let mut x = vec![0.0; model.dim()];
    let (mut std_miss, mut rob_miss) = (0usize, 0usize);
    for _ in 0..n_samples {
        let y = Label::from_coin(rng.coin());
        draw_point(model, y, rng, &mut x);
        let score = clf.score(&x);
        if Label::from_sign(score) != y {
            std_miss += 1;
        }
        if y.value() * score - budget < 0.0 {
            rob_miss += 1;
        }
    }
    let n = n_samples as f64;
    Ok((std_miss as f64 / n, rob_miss as f64 / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statkit::split_stream;

    #[test]
    fn canonical_parameters() {
        let m = canonical_model(4, 16, 0.25, false).unwrap();
        assert_eq!(m.mu, vec![1.0; 16]);
        assert!((m.sigma - 2.828_427_124_746_19).abs() < 1e-12);

        let unit = canonical_model(1, 1, 0.0, false).unwrap();
        assert_eq!(unit.sigma, 1.0);
        assert_eq!(unit.mu, vec![1.0]);

        let big = canonical_model(25, 250_000, 0.5, true).unwrap();
        assert!((big.sigma - 50.0).abs() < 1e-12);
        assert_eq!(big.n0, Some(25));
    }

    #[test]
    fn large_epsilon_needs_override() {
        assert!(matches!(
            canonical_model(4, 16, 0.5, false),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(canonical_model(4, 16, -0.1, true).is_err());
        assert!(canonical_model(0, 16, 0.1, false).is_err());
    }

    #[test]
    fn direction_is_rescaled() {
        let m = canonical_model_with_direction(2, &[3.0, 4.0], 0.1, false).unwrap();
        assert!((dot(&m.mu, &m.mu) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_classifier_errors() {
        let (n0, d, eps) = (4u64, 64usize, 0.3);
        let m = canonical_model(n0, d, eps, false).unwrap();
        let star = LinearClassifier::new(m.mu.clone());
        let ratio = (d as f64 / n0 as f64).powf(0.25);
        let std = standard_error(&m, &star).unwrap();
        assert!((std - q_function(ratio)).abs() < 1e-15);
        let rob = robust_error(&m, &star).unwrap();
        assert!((rob - q_function((1.0 - eps) * ratio)).abs() < 1e-14);
        let flipped = standard_error(&m, &star.negated()).unwrap();
        assert!((flipped - (1.0 - q_function(ratio))).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_classifier_is_coin_flip() {
        let m = canonical_model(1, 2, 0.0, false).unwrap();
        let clf = LinearClassifier::new(vec![1.0, -1.0]);
        assert_eq!(standard_error(&m, &clf).unwrap(), 0.5);
    }

    #[test]
    fn scalar_case() {
        let m = GaussianModel::new(vec![2.5], 1.7, 0.4).unwrap();
        let clf = LinearClassifier::new(vec![1.0]);
        let rob = robust_error(&m, &clf).unwrap();
        assert!((rob - q_function((2.5 - 0.4) / 1.7)).abs() < 1e-15);
    }

    #[test]
    fn zero_weights_rejected() {
        let m = canonical_model(1, 3, 0.1, false).unwrap();
        let zero = LinearClassifier::new(vec![0.0; 3]);
        assert!(matches!(standard_error(&m, &zero), Err(Error::ZeroWeights)));
        assert!(matches!(robust_error(&m, &zero), Err(Error::ZeroWeights)));
    }

    #[test]
    fn noiseless_samples_are_separated() {
        let m = canonical_model(1, 5, 0.0, false).unwrap().with_sigma(1e-12).unwrap();
        let data = sample_labeled(&m, 200, &mut split_stream(1, 0));
        for (x, y) in data.xs.iter().zip(&data.ys) {
            assert_eq!(Label::from_sign(dot(&m.mu, x)), *y);
        }
        let clf = LinearClassifier::new(m.mu.clone());
        let (s, r) = mc_error_estimate(&m, &clf, 1000, &mut split_stream(1, 1)).unwrap();
        assert_eq!((s, r), (0.0, 0.0));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = canonical_model(2, 8, 0.1, false).unwrap();
        let a = sample_labeled(&m, 20, &mut split_stream(5, 5));
        let b = sample_labeled(&m, 20, &mut split_stream(5, 5));
        assert_eq!(a, b);
    }

    #[test]
    fn label_signs() {
        assert_eq!(Label::from_sign(0.0), Label::Pos);
        assert_eq!(Label::from_sign(-0.0), Label::Pos);
        assert_eq!(Label::from_sign(-1e-300), Label::Neg);
        assert!(Label::Neg < Label::Pos);
    }
}

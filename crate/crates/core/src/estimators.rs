//! Supervised averaging estimator, two-stage self-training, the
//! relevant/irrelevant unlabeled mixture, and an exact fast sampler for the
//! self-trained classifier.
//!
//! The fast sampler rests on one observation. Pseudo-labels depend on an
//! unlabeled point's noise only through its component `u = πᵀε` along the
//! intermediate direction `π`. The orthogonal noise is independent of every
//! pseudo-label, so its pseudo-label-weighted average is again
//! `N(0, (σ²/ñ)(I - ππᵀ))` and can be drawn in one shot. The self-trained
//! classifier is then
//!
//! ```text
//! final = (A/ñ)·mu + (U/ñ)·π + g,   A = Σ_relevant ỹ_i y_i,   U = Σ ỹ_i u_i
//! ```
//!
//! which costs `O(ñ + d)` instead of `O(ñ·d)`.

use rand::seq::SliceRandom;

use crate::error::{invalid, Error, Result};
use crate::gaussian_model::{draw_point, GaussianModel, LabeledSet, Label, LinearClassifier};
use crate::linalg::{axpy, dot, norm2, scale};
use crate::statkit::RngStream;

/// Coordinates (`points × dim`) the naive samplers may materialize.
pub const MATERIALIZATION_BUDGET: usize = 100_000_000;

/// Unlabeled pool. `relevant` is provenance for the harness only.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UnlabeledSet {
    pub xs: Vec<Vec<f64>>,
    pub relevant: Vec<bool>,
}

impl UnlabeledSet {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Pool with every point marked relevant.
    pub fn from_inputs(xs: Vec<Vec<f64>>) -> Self {
        let relevant = vec![true; xs.len()];
        Self { xs, relevant }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfTrainResult {
    pub intermediate: LinearClassifier,
    pub final_classifier: LinearClassifier,
    /// `(1/ñ) Σ ỹ_i y_i`, only when the harness kept the true labels.
    pub pseudo_label_agreement: Option<f64>,
}

/// `θ = (1/n) Σ y_i x_i`
pub fn supervised_estimator(data: &LabeledSet) -> Result<LinearClassifier> {
    let d = data.dim().ok_or_else(|| invalid("labeled set is empty"))?;
    let mut theta = vec![0.0; d];
    for (x, y) in data.xs.iter().zip(&data.ys) {
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        axpy(y.value(), x, &mut theta);
    }
    scale(1.0 / data.len() as f64, &mut theta);
    Ok(LinearClassifier::new(theta))
}

/// `sign(xᵀθ)` with ties to `+1`.
pub fn pseudo_label(clf: &LinearClassifier, x: &[f64]) -> Label {
    clf.predict(x)
}

fn self_train_inner(
    labeled: &LabeledSet,
    unlabeled: &UnlabeledSet,
    truth: Option<&[Label]>,
) -> Result<SelfTrainResult> {
    let intermediate = supervised_estimator(labeled)?;
    if unlabeled.is_empty() {
        return Err(invalid("unlabeled set is empty"));
    }
    let d = intermediate.dim();
    let mut theta = vec![0.0; d];
    let mut agree = 0.0;
    for (i, x) in unlabeled.xs.iter().enumerate() {
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: x.len(),
            });
        }
        let pseudo = pseudo_label(&intermediate, x);
        axpy(pseudo.value(), x, &mut theta);
        if let Some(t) = truth {
            agree += pseudo.value() * t[i].value();
        }
    }
    let n = unlabeled.len() as f64;
    scale(1.0 / n, &mut theta);
    Ok(SelfTrainResult {
        intermediate,
        final_classifier: LinearClassifier::new(theta),
        pseudo_label_agreement: truth.map(|_| agree / n),
    })
}

/// Fit on labels, pseudo-label the pool, refit on the pseudo-labeled pool.
pub fn self_train(labeled: &LabeledSet, unlabeled: &UnlabeledSet) -> Result<SelfTrainResult> {
    self_train_inner(labeled, unlabeled, None)
}

/// [`self_train`], additionally reporting pseudo-label agreement against the
/// hidden labels.
pub fn self_train_with_truth(
    labeled: &LabeledSet,
    unlabeled: &UnlabeledSet,
    hidden_labels: &[Label],
) -> Result<SelfTrainResult> {
    if hidden_labels.len() != unlabeled.len() {
        return Err(invalid("hidden label count does not match the unlabeled pool"));
    }
    self_train_inner(labeled, unlabeled, Some(hidden_labels))
}

fn relevant_count(n_unlabeled: usize, relevant_fraction: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&relevant_fraction) {
        return Err(invalid(format!(
            "relevant fraction {relevant_fraction} is outside [0, 1]"
        )));
    }
    Ok((relevant_fraction * n_unlabeled as f64).round() as usize)
}

/// Unlabeled pool with `round(α·ñ)` signal points and the rest drawn from
/// `N(0, σ²I)`. Every point carries a hidden uniform label; irrelevant
/// points' labels are independent of `x`.
pub fn sample_mixture(
    model: &GaussianModel,
    n_unlabeled: usize,
    relevant_fraction: f64,
    rng: &mut RngStream,
) -> Result<(UnlabeledSet, Vec<Label>)> {
    if n_unlabeled == 0 {
        return Err(invalid("n_unlabeled must be at least 1"));
    }
    let n_relevant = relevant_count(n_unlabeled, relevant_fraction)?;
    let d = model.dim();
    let mut points = Vec::with_capacity(n_unlabeled);
    for i in 0..n_unlabeled {
        let y = Label::from_coin(rng.coin());
        let mut x = vec![0.0; d];
        let relevant = i < n_relevant;
        if relevant {
            draw_point(model, y, rng, &mut x);
        } else {
            rng.fill_standard_normal(&mut x);
            scale(model.sigma, &mut x);
        }
        points.push((x, relevant, y));
    }
    points.shuffle(rng);
    let mut set = UnlabeledSet::default();
    let mut hidden = Vec::with_capacity(n_unlabeled);
    for (x, r, y) in points {
        set.xs.push(x);
        set.relevant.push(r);
        hidden.push(y);
    }
    Ok((set, hidden))
}

/// Draw of the supervised estimator from `n` labels via its exact law
/// `N(mu, (σ²/n) I)`, in `O(d)`.
pub fn sample_supervised_fast(model: &GaussianModel, n: usize, rng: &mut RngStream) -> Result<LinearClassifier> {
    if n == 0 {
        return Err(invalid("n_labeled must be at least 1"));
    }
    let mut theta = vec![0.0; model.dim()];
    rng.fill_standard_normal(&mut theta);
    let s = model.sigma / (n as f64).sqrt();
    for (t, m) in theta.iter_mut().zip(&model.mu) {
        *t = m + s * *t;
    }
    Ok(LinearClassifier::new(theta))
}

/// Supervised estimator on `n` materialized draws.
pub fn sample_supervised_naive(model: &GaussianModel, n: usize, rng: &mut RngStream) -> Result<LinearClassifier> {
    if n == 0 {
        return Err(invalid("n_labeled must be at least 1"));
    }
    check_budget(n, model.dim())?;
    let data = crate::gaussian_model::sample_labeled(model, n, rng);
    supervised_estimator(&data)
}

fn check_budget(points: usize, dim: usize) -> Result<()> {
    if points.saturating_mul(dim) > MATERIALIZATION_BUDGET {
        return Err(Error::MemoryBudget {
            points,
            dim,
            budget: MATERIALIZATION_BUDGET,
        });
    }
    Ok(())
}

/// Self-training on fully materialized labeled and unlabeled draws. This is
/// the reference the fast sampler is checked against.
pub fn naive_selftrain_sample(
    model: &GaussianModel,
    n_labeled: usize,
    n_unlabeled: usize,
    relevant_fraction: f64,
    rng: &mut RngStream,
) -> Result<SelfTrainResult> {
    if n_labeled == 0 {
        return Err(invalid("n_labeled must be at least 1"));
    }
    check_budget(n_labeled.max(n_unlabeled), model.dim())?;
    let labeled = crate::gaussian_model::sample_labeled(model, n_labeled, rng);
    let (pool, hidden) = sample_mixture(model, n_unlabeled, relevant_fraction, rng)?;
    self_train_with_truth(&labeled, &pool, &hidden)
}

/// Draws `(intermediate, final)` with exactly the joint law of
/// [`naive_selftrain_sample`], in `O(ñ + d)`.
pub fn fast_selftrain_sample(
    model: &GaussianModel,
    n_labeled: usize,
    n_unlabeled: usize,
    relevant_fraction: f64,
    rng: &mut RngStream,
) -> Result<SelfTrainResult> {
    if n_unlabeled == 0 {
        return Err(invalid("n_unlabeled must be at least 1"));
    }
    let n_relevant = relevant_count(n_unlabeled, relevant_fraction)?;
    let intermediate = sample_supervised_fast(model, n_labeled, rng)?;
    let norm = norm2(&intermediate.theta);
    if norm == 0.0 {
        return Err(Error::ZeroWeights);
    }
    let pi: Vec<f64> = intermediate.theta.iter().map(|t| t / norm).collect();
    let mu_along = model.mu_dot(&pi);
    let sigma = model.sigma;

    let (mut signal, mut along, mut agree) = (0.0, 0.0, 0.0);
    for i in 0..n_unlabeled {
        let y = Label::from_coin(rng.coin()).value();
        let u = sigma * rng.standard_normal();
        let relevant = i < n_relevant;
        let score = if relevant { y * mu_along + u } else { u };
        let pseudo = Label::from_sign(score).value();
        if relevant {
            signal += pseudo * y;
        }
        agree += pseudo * y;
        along += pseudo * u;
    }

    let mut g = vec![0.0; model.dim()];
    rng.fill_standard_normal(&mut g);
    let proj = dot(&g, &pi);
    axpy(-proj, &pi, &mut g);
    let n = n_unlabeled as f64;
    scale(sigma / n.sqrt(), &mut g);
    axpy(signal / n, &model.mu, &mut g);
    axpy(along / n, &pi, &mut g);

    Ok(SelfTrainResult {
        intermediate,
        final_classifier: LinearClassifier::new(g),
        pseudo_label_agreement: Some(agree / n),
    })
}

/// Which self-training sampler an experiment uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SamplerPath {
    /// Fast sampler once `points·d` exceeds [`MATERIALIZATION_BUDGET`].
    #[default]
    Auto,
    Naive,
    Fast,
}

impl SamplerPath {
    pub fn use_fast(self, points: usize, dim: usize) -> bool {
        match self {
            SamplerPath::Auto => points.saturating_mul(dim) > MATERIALIZATION_BUDGET,
            SamplerPath::Naive => false,
            SamplerPath::Fast => true,
        }
    }
}

/// Supervised estimator draw along the selected path.
pub fn sample_supervised(
    model: &GaussianModel,
    n: usize,
    path: SamplerPath,
    rng: &mut RngStream,
) -> Result<LinearClassifier> {
    if path.use_fast(n, model.dim()) {
        sample_supervised_fast(model, n, rng)
    } else {
        sample_supervised_naive(model, n, rng)
    }
}

/// Self-training draw along the selected path.
pub fn sample_selftrain(
    model: &GaussianModel,
    n_labeled: usize,
    n_unlabeled: usize,
    relevant_fraction: f64,
    path: SamplerPath,
    rng: &mut RngStream,
) -> Result<SelfTrainResult> {
    if path.use_fast(n_labeled.max(n_unlabeled), model.dim()) {
        fast_selftrain_sample(model, n_labeled, n_unlabeled, relevant_fraction, rng)
    } else {
        naive_selftrain_sample(model, n_labeled, n_unlabeled, relevant_fraction, rng)
    }
}

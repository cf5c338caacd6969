//! Robust self-training for linear logistic models.
//!
//! Stage 1 fits a model with the log loss alone and pseudo-labels the
//! unlabeled pool with it. Stage 2 minimizes
//!
//! ```text
//! Σ_labeled [L_std + β·L_reg] + w · Σ_unlabeled [L_std + β·L_reg]
//! ```
//!
//! by plain mini-batch SGD. Gradients of the adversarial regularizers hold
//! the maximizing point fixed (envelope rule).

use super::logistic::{standard_loss, LogisticModel, LossGrad};
use super::regularizer::{adversarial_reg_exact, adversarial_reg_pg, kl_param_grad, stability_reg};
use crate::error::{invalid, Error, Result};
use crate::estimators::{pseudo_label, UnlabeledSet};
use crate::gaussian_model::{LabeledSet, Label, LinearClassifier};
use crate::linalg::axpy;
use crate::statkit::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegKind {
    /// Worst case over the ℓ∞ ball, solved exactly for linear models.
    AdversarialExact,
    /// Worst case over the ℓ∞ ball, approximated by projected ascent.
    AdversarialPg,
    /// Additive Gaussian noise in place of the worst case.
    Stability,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RstConfig {
    pub beta: f64,
    pub w_unlabeled: f64,
    pub epsilon: f64,
    pub noise_sigma: f64,
    pub noise_samples: usize,
    pub pg_steps: usize,
    pub pg_step_size: f64,
    pub learning_rate: f64,
    pub grad_steps: usize,
    /// Examples per step, drawn with replacement; 0 means full batch.
    pub batch_size: usize,
    pub reg_kind: RegKind,
    /// Compose each batch from equal halves labeled and unlabeled instead of
    /// one weighted pool.
    pub balanced_batches: bool,
    /// Record the full-pool objective after every step.
    pub record_trace: bool,
}

impl Default for RstConfig {
    fn default() -> Self {
        Self {
            beta: 6.0,
            w_unlabeled: 1.0,
            epsilon: 0.1,
            noise_sigma: 0.25,
            noise_samples: 1,
            pg_steps: 10,
            pg_step_size: 0.025,
            learning_rate: 0.01,
            grad_steps: 1000,
            batch_size: 64,
            reg_kind: RegKind::AdversarialExact,
            balanced_batches: false,
            record_trace: false,
        }
    }
}

impl RstConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("beta", self.beta),
            ("w_unlabeled", self.w_unlabeled),
            ("epsilon", self.epsilon),
            ("noise_sigma", self.noise_sigma),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be a nonnegative number, got {v}")));
            }
        }
        if !(self.learning_rate > 0.0) {
            return Err(invalid("learning_rate must be positive"));
        }
        if self.reg_kind == RegKind::AdversarialPg && (self.pg_steps == 0 || !(self.pg_step_size > 0.0)) {
            return Err(invalid("adversarial_pg needs pg_steps >= 1 and pg_step_size > 0"));
        }
        if self.reg_kind == RegKind::Stability && self.noise_samples == 0 {
            return Err(invalid("stability regularizer needs noise_samples >= 1"));
        }
        Ok(())
    }
}

/// Stage-1 settings: log loss only.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardConfig {
    pub learning_rate: f64,
    pub grad_steps: usize,
    pub batch_size: usize,
}

impl Default for StandardConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            grad_steps: 1000,
            batch_size: 64,
        }
    }
}

/// Trained parameters plus the objective trace, when recorded.
#[derive(Clone, Debug, PartialEq)]
pub struct RstFit {
    pub model: LogisticModel,
    pub loss_trace: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Example<'a> {
    x: &'a [f64],
    y: Label,
}

fn regularizer(model: &LogisticModel, x: &[f64], config: &RstConfig, rng: &mut RngStream) -> (f64, Vec<f64>) {
    match config.reg_kind {
        RegKind::AdversarialExact => {
            let adv = adversarial_reg_exact(model, x, config.epsilon);
            kl_param_grad(model, x, &adv.x_adv)
        }
        RegKind::AdversarialPg => {
            let adv = adversarial_reg_pg(model, x, config.epsilon, config.pg_steps, config.pg_step_size, rng);
            kl_param_grad(model, x, &adv.x_adv)
        }
        RegKind::Stability => {
            let est = stability_reg(model, x, config.noise_sigma, config.noise_samples, rng);
            (est.value, est.grad)
        }
    }
}

/// `L_std + β·L_reg` at one example.
fn example_loss(model: &LogisticModel, ex: Example<'_>, config: &RstConfig, rng: &mut RngStream) -> LossGrad {
    let mut out = standard_loss(model, ex.x, ex.y);
    if config.beta > 0.0 {
        let (v, g) = regularizer(model, ex.x, config, rng);
        out.value += config.beta * v;
        axpy(config.beta, &g, &mut out.grad);
    }
    out
}

fn accumulate<'a>(
    model: &LogisticModel,
    examples: impl Iterator<Item = Example<'a>>,
    weight: f64,
    config: &RstConfig,
    rng: &mut RngStream,
    acc: &mut LossGrad,
) {
    for ex in examples {
        let l = example_loss(model, ex, config, rng);
        acc.value += weight * l.value;
        axpy(weight, &l.grad, &mut acc.grad);
    }
}

struct Pool<'a> {
    labeled: Vec<Example<'a>>,
    unlabeled: Vec<Example<'a>>,
    dim: usize,
}

impl<'a> Pool<'a> {
    fn build(labeled: &'a LabeledSet, unlabeled: &'a UnlabeledSet, pseudo: &[Label]) -> Result<Self> {
        let dim = labeled.dim().ok_or_else(|| invalid("labeled set is empty"))?;
        if pseudo.len() != unlabeled.len() {
            return Err(invalid("pseudo-label count does not match the unlabeled pool"));
        }
        let mut pool = Pool {
            labeled: Vec::with_capacity(labeled.len()),
            unlabeled: Vec::with_capacity(unlabeled.len()),
            dim,
        };
        for (x, &y) in labeled.xs.iter().zip(&labeled.ys) {
            check_dim(dim, x)?;
            pool.labeled.push(Example { x, y });
        }
        for (x, &y) in unlabeled.xs.iter().zip(pseudo) {
            check_dim(dim, x)?;
            pool.unlabeled.push(Example { x, y });
        }
        Ok(pool)
    }

    fn total(&self) -> usize {
        self.labeled.len() + self.unlabeled.len()
    }

    fn get(&self, i: usize) -> (Example<'a>, bool) {
        if i < self.labeled.len() {
            (self.labeled[i], false)
        } else {
            (self.unlabeled[i - self.labeled.len()], true)
        }
    }

    /// Objective over every example, normalized like the mini-batch
    /// estimates so the two are on the same scale.
    fn full_objective(&self, model: &LogisticModel, config: &RstConfig, rng: &mut RngStream) -> LossGrad {
        let mut acc = LossGrad {
            value: 0.0,
            grad: vec![0.0; self.dim],
        };
        if config.balanced_batches && !self.unlabeled.is_empty() {
            let wl = 1.0 / self.labeled.len() as f64;
            let wu = config.w_unlabeled / self.unlabeled.len() as f64;
            accumulate(model, self.labeled.iter().copied(), wl, config, rng, &mut acc);
            accumulate(model, self.unlabeled.iter().copied(), wu, config, rng, &mut acc);
        } else {
            let n = self.total() as f64;
            accumulate(model, self.labeled.iter().copied(), 1.0 / n, config, rng, &mut acc);
            accumulate(model, self.unlabeled.iter().copied(), config.w_unlabeled / n, config, rng, &mut acc);
        }
        acc
    }

    fn batch_objective(
        &self,
        model: &LogisticModel,
        config: &RstConfig,
        picker: &mut RngStream,
        rng: &mut RngStream,
    ) -> LossGrad {
        if config.batch_size == 0 {
            return self.full_objective(model, config, rng);
        }
        let mut acc = LossGrad {
            value: 0.0,
            grad: vec![0.0; self.dim],
        };
        let b = config.batch_size;
        if config.balanced_batches && !self.unlabeled.is_empty() {
            let half = (b / 2).max(1);
            let lab: Vec<_> = (0..half).map(|_| self.labeled[picker.index(self.labeled.len())]).collect();
            let unl: Vec<_> = (0..half).map(|_| self.unlabeled[picker.index(self.unlabeled.len())]).collect();
            accumulate(model, lab.into_iter(), 1.0 / half as f64, config, rng, &mut acc);
            accumulate(model, unl.into_iter(), config.w_unlabeled / half as f64, config, rng, &mut acc);
        } else {
            let n = self.total();
            for _ in 0..b {
                let (ex, is_unlabeled) = self.get(picker.index(n));
                let w = if is_unlabeled { config.w_unlabeled } else { 1.0 } / b as f64;
                accumulate(model, std::iter::once(ex), w, config, rng, &mut acc);
            }
        }
        acc
    }
}

fn check_dim(d: usize, x: &[f64]) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    Ok(())
}

/// Full-pool objective and gradient at `model`. Draws for the PG start and
/// the stability noise come from `rng`, so a cloned stream reproduces them.
pub fn robust_objective(
    model: &LogisticModel,
    labeled: &LabeledSet,
    unlabeled_with_pseudo: (&UnlabeledSet, &[Label]),
    config: &RstConfig,
    rng: &mut RngStream,
) -> Result<LossGrad> {
    let pool = Pool::build(labeled, unlabeled_with_pseudo.0, unlabeled_with_pseudo.1)?;
    check_dim(pool.dim, &model.theta)?;
    Ok(pool.full_objective(model, config, rng))
}

/// Stage 2: robust training on labeled plus pseudo-labeled data, from
/// `theta = 0`.
pub fn rst_train(
    labeled: &LabeledSet,
    unlabeled_with_pseudo: (&UnlabeledSet, &[Label]),
    config: &RstConfig,
    rng: &mut RngStream,
) -> Result<RstFit> {
    config.validate()?;
    if labeled.is_empty() {
        return Err(invalid("labeled set is empty"));
    }
    let pool = Pool::build(labeled, unlabeled_with_pseudo.0, unlabeled_with_pseudo.1)?;
    let mut model = LogisticModel::zeros(pool.dim);
    let mut picker = rng.substream(0);
    let mut reg_rng = rng.substream(1);
    let trace_rng = rng.substream(2);
    let mut trace = Vec::new();
    if config.record_trace {
        trace.push(pool.full_objective(&model, config, &mut trace_rng.clone()).value);
    }
    for _ in 0..config.grad_steps {
        let step = pool.batch_objective(&model, config, &mut picker, &mut reg_rng);
        axpy(-config.learning_rate, &step.grad, &mut model.theta);
        if config.record_trace {
            trace.push(pool.full_objective(&model, config, &mut trace_rng.clone()).value);
        }
    }
    Ok(RstFit {
        model,
        loss_trace: trace,
    })
}

/// Stage 1: plain logistic regression by mini-batch SGD from `theta = 0`.
pub fn train_standard(labeled: &LabeledSet, config: &StandardConfig, rng: &mut RngStream) -> Result<LogisticModel> {
    let d = labeled.dim().ok_or_else(|| invalid("labeled set is empty"))?;
    if !(config.learning_rate > 0.0) {
        return Err(invalid("learning_rate must be positive"));
    }
    for x in &labeled.xs {
        check_dim(d, x)?;
    }
    let n = labeled.len();
    let mut model = LogisticModel::zeros(d);
    let mut grad = vec![0.0; d];
    for _ in 0..config.grad_steps {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let idx: Vec<usize> = if config.batch_size == 0 {
            (0..n).collect()
        } else {
            (0..config.batch_size).map(|_| rng.index(n)).collect()
        };
        let w = 1.0 / idx.len() as f64;
        for i in idx {
            let l = standard_loss(&model, &labeled.xs[i], labeled.ys[i]);
            axpy(w, &l.grad, &mut grad);
        }
        axpy(-config.learning_rate, &grad, &mut model.theta);
    }
    Ok(model)
}

/// Both stages end to end.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustSelfTraining {
    pub intermediate: LogisticModel,
    pub pseudo_labels: Vec<Label>,
    pub fit: RstFit,
}

pub fn robust_self_train(
    labeled: &LabeledSet,
    unlabeled: &UnlabeledSet,
    stage1: &StandardConfig,
    config: &RstConfig,
    rng: &mut RngStream,
) -> Result<RobustSelfTraining> {
    let intermediate = train_standard(labeled, stage1, &mut rng.substream(10))?;
    let clf = LinearClassifier::new(intermediate.theta.clone());
    let pseudo_labels: Vec<Label> = unlabeled.xs.iter().map(|x| pseudo_label(&clf, x)).collect();
    let fit = rst_train(labeled, (unlabeled, &pseudo_labels), config, &mut rng.substream(11))?;
    Ok(RobustSelfTraining {
        intermediate,
        pseudo_labels,
        fit,
    })
}

impl LogisticModel {
    pub fn to_linear(&self) -> LinearClassifier {
        LinearClassifier::new(self.theta.clone())
    }
}

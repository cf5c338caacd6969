//! Robust self-training for binary linear logistic models: log loss, the
//! KL stability regularizers, SGD training and the closed-form smoothed
//! prediction.

mod logistic;
mod regularizer;
mod train;

pub use logistic::{
    kl_bernoulli, kl_scores, sigmoid, smoothed_predict_exact, softplus, standard_loss, LogisticModel, LossGrad,
    ScoreKl, PROB_CLAMP,
};
pub(crate) use logistic::smoothed_vote;
pub use regularizer::{
    adversarial_reg_exact, adversarial_reg_pg, kl_param_grad, stability_reg, AdversarialPoint, StabilityEstimate,
};
pub use train::{
    robust_objective, robust_self_train, rst_train, train_standard, RegKind, RobustSelfTraining, RstConfig, RstFit,
    StandardConfig,
};

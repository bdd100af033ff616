//! Gumbel-Max set-invariant structural causal model over expert predictions.
//!
//! Experts are grouped by a [`Partition`](crate::types::Partition). Every
//! expert in a group perturbs its own log-probabilities with the group's
//! shared standard Gumbel noise and predicts the argmax. Evaluating a subset
//! of experts never changes what the remaining experts predict.

mod counterfactual;
mod mechanism;
mod noise;

pub use counterfactual::{
    counterfactual_argmax, counterfactual_distribution, shared_noise_counterfactuals,
    shared_noise_counts, CounterfactualEstimate, CounterfactualQuery,
};
pub use mechanism::{joint_from_noise, mechanism, sample_joint, GroupNoise};
pub use noise::{gumbel_from_uniform, sample_posterior_noise, sample_prior_noise, GumbelVector};

//! Weight-update rules applied at output spikes.
//!
//! Updates are exact: each qualifying input spike yields one promotion or
//! demotion followed by renormalization. First-order expansions of the
//! normalization factors are only used on the estimator side.

mod kernel;
mod learner;
mod rules;
mod weights;

pub use kernel::{EpsilonKernel, KernelShape};
pub use learner::{Learner, UpdateObserver};
pub use rules::{decay_model_update, hebbian_update, stdp_update, Direction, PlasticityRule, RuleKind, UpdateEvent};
pub use weights::{normalize, WeightVector};
pub(crate) use weights::power_moment;

/// Exact normalization factor after promoting channel `i` by `eps`:
/// `ς_i = (Σ_{j≠i} w_j^l + (w_i + ε)^l)^(1/l)`.
pub fn promotion_factor(weights: &WeightVector, channel: usize, eps: f64) -> f64 {
    shifted_norm(weights, channel, eps)
}

/// Exact normalization factor after demoting channel `i` by `eps`.
pub fn demotion_factor(weights: &WeightVector, channel: usize, eps: f64) -> f64 {
    shifted_norm(weights, channel, -eps)
}

fn shifted_norm(weights: &WeightVector, channel: usize, shift: f64) -> f64 {
    let l = weights.norm_exponent();
    let mut v = weights.values().to_vec();
    v[channel] = (v[channel] + shift).max(0.0);
    weights::lp_norm(&v, l)
}

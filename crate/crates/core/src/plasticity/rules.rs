use crate::error::{invalid, Error, Result};
use crate::neuron::{OutputSpike, SpikeEvent};

use super::kernel::EpsilonKernel;
use super::weights::WeightVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RuleKind {
    /// Promote channels that fired within the window before an output spike.
    PureHebbian,
    /// Promote before, demote after, over the same window length.
    Stdp,
    /// Hebbian promotions without normalization: every promotion first
    /// shrinks all weights by the fraction `delta`.
    DecayModel { delta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlasticityRule {
    pub kind: RuleKind,
    pub kernel: EpsilonKernel,
    /// Exponent of the normalizing norm; ignored by the decay model.
    pub norm_exponent: f64,
}

impl PlasticityRule {
    pub fn hebbian(kernel: EpsilonKernel, norm_exponent: f64) -> Result<Self> {
        Self::build(RuleKind::PureHebbian, kernel, norm_exponent)
    }

    pub fn stdp(kernel: EpsilonKernel, norm_exponent: f64) -> Result<Self> {
        Self::build(RuleKind::Stdp, kernel, norm_exponent)
    }

    pub fn decay_model(kernel: EpsilonKernel, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid(format!("decay fraction must lie in (0, 1), got {delta}")));
        }
        Self::build(RuleKind::DecayModel { delta }, kernel, 1.0)
    }

    fn build(kind: RuleKind, kernel: EpsilonKernel, norm_exponent: f64) -> Result<Self> {
        if !(norm_exponent >= 1.0 && norm_exponent.is_finite()) {
            return Err(invalid(format!("norm exponent must be >= 1, got {norm_exponent}")));
        }
        Ok(Self { kind, kernel, norm_exponent })
    }

    pub fn window(&self) -> f64 {
        self.kernel.window
    }

    /// Whether updates for an output spike must wait for the post-window.
    pub fn has_post_window(&self) -> bool {
        matches!(self.kind, RuleKind::Stdp)
    }

    /// Applies the updates for one output spike to `weights`, strictly in
    /// chronological order with one normalization per event.
    ///
    /// `epsilon(offset)` supplies the step for each event and `observe` sees
    /// every event together with the weights just before it is applied.
    /// With `apply == false` events are produced against frozen weights.
    pub(crate) fn apply_window(
        &self,
        weights: &mut WeightVector,
        pre: &[SpikeEvent],
        post: &[SpikeEvent],
        output: &OutputSpike,
        mut epsilon: impl FnMut(f64) -> f64,
        mut observe: impl FnMut(&UpdateEvent, &WeightVector),
        apply: bool,
    ) -> Result<()> {
        let tau = self.window();
        let t = output.time;
        for s in pre {
            weights.check_channel(s.channel)?;
            if !(s.time >= t - tau && s.time <= t) {
                return Err(Error::OutsideWindow { spike: s.time, start: t - tau, end: t });
            }
        }
        if !post.is_empty() && !self.has_post_window() {
            return Err(invalid("post-window spikes given to a rule without demotions"));
        }
        for s in post {
            weights.check_channel(s.channel)?;
            if !(s.time > t && s.time <= t + tau) {
                return Err(Error::OutsideWindow { spike: s.time, start: t, end: t + tau });
            }
        }
        let mut ordered: Vec<(SpikeEvent, Direction)> = pre
            .iter()
            .map(|s| (*s, Direction::Promotion))
            .chain(post.iter().map(|s| (*s, Direction::Demotion)))
            .collect();
        // Pre spikes all precede post spikes, so a stable sort keeps both runs intact.
        ordered.sort_by(|a, b| a.0.time.total_cmp(&b.0.time).then(a.0.channel.cmp(&b.0.channel)));

        for (spike, direction) in ordered {
            let offset = spike.time - t;
            // A zero step (adaptive rate at Δ = 0) is still an event for the estimators.
            let eps = epsilon(offset).max(0.0);
            let event = UpdateEvent {
                channel: spike.channel,
                direction,
                offset,
                applied_epsilon: eps,
                weight_before: weights.values()[spike.channel],
            };
            observe(&event, weights);
            if apply && eps > 0.0 {
                match (self.kind, direction) {
                    (RuleKind::DecayModel { delta }, _) => decay_promote(weights, spike.channel, eps, delta),
                    (_, Direction::Promotion) => promote(weights, spike.channel, eps)?,
                    (_, Direction::Demotion) => demote(weights, spike.channel, eps)?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Promotion,
    Demotion,
}

/// One single-channel weight change.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateEvent {
    pub channel: usize,
    pub direction: Direction,
    /// Input spike time minus output spike time.
    pub offset: f64,
    pub applied_epsilon: f64,
    /// Weight of `channel` immediately before this event.
    pub weight_before: f64,
}

fn promote(weights: &mut WeightVector, channel: usize, eps: f64) -> Result<()> {
    let w = weights.values()[channel];
    weights.set(channel, w + eps);
    weights.normalize().map(|_| ())
}

fn demote(weights: &mut WeightVector, channel: usize, eps: f64) -> Result<()> {
    let w = weights.values()[channel];
    weights.set(channel, (w - eps).max(0.0));
    weights.normalize().map(|_| ())
}

fn decay_promote(weights: &mut WeightVector, channel: usize, eps: f64, delta: f64) {
    for w in weights.values_mut() {
        *w *= 1.0 - delta;
    }
    let w = weights.values()[channel];
    weights.set(channel, w + eps);
}

fn deterministic(rule: &PlasticityRule) -> impl FnMut(f64) -> f64 + '_ {
    move |offset| rule.kernel.epsilon_at(offset)
}

/// Promotes every spike of `pre_window` (fired in `[t - τ, t]`), renormalizing
/// after each one. Uses the deterministic kernel value; randomized steps are
/// drawn by [`super::Learner`].
pub fn hebbian_update(
    weights: &WeightVector,
    rule: &PlasticityRule,
    pre_window: &[SpikeEvent],
    output: &OutputSpike,
) -> Result<(WeightVector, Vec<UpdateEvent>)> {
    stdp_update(weights, rule, pre_window, &[], output)
}

/// Promotes pre-window spikes and demotes post-window spikes (`(t, t + τ]`),
/// chronologically, each followed by normalization. Demoted weights are
/// floored at zero.
pub fn stdp_update(
    weights: &WeightVector,
    rule: &PlasticityRule,
    pre_window: &[SpikeEvent],
    post_window: &[SpikeEvent],
    output: &OutputSpike,
) -> Result<(WeightVector, Vec<UpdateEvent>)> {
    if matches!(rule.kind, RuleKind::DecayModel { .. }) {
        return Err(invalid("decay-model rules are applied with decay_model_update"));
    }
    let mut out = weights.clone();
    let mut events = Vec::with_capacity(pre_window.len() + post_window.len());
    rule.apply_window(&mut out, pre_window, post_window, output, deterministic(rule), |e, _| events.push(*e), true)?;
    Ok((out, events))
}

/// `w_j ← w_j (1 - δ)` for every channel, then `w_c ← w_c + ε`.
pub fn decay_model_update(
    weights: &WeightVector,
    rule: &PlasticityRule,
    promoted_channel: usize,
) -> Result<WeightVector> {
    let RuleKind::DecayModel { delta } = rule.kind else {
        return Err(invalid("decay_model_update needs a decay-model rule"));
    };
    weights.check_channel(promoted_channel)?;
    let mut out = weights.clone();
    decay_promote(&mut out, promoted_channel, rule.kernel.amplitude, delta);
    Ok(out)
}

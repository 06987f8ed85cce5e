use crate::error::{invalid, Error, Result};
use crate::plasticity::{power_moment, Direction, WeightVector};

use super::EstimatorState;

const DEGENERATE: f64 = 1e-12;

/// Which steady-state relation a report evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintForm {
    Hebbian,
    Stdp,
    KernelStdp,
    Decay,
}

/// Snapshot of one constraint evaluation.
///
/// `lhs` holds the per-channel `L_i`; `delta` is `Σ_i |L_i − w_i/Σ_j w_j|`
/// computed from `lhs` and `normalized_weights`. `predicted_promotion` is
/// the promotion probability implied by the current weights, to be set
/// against `estimated_promotion`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintReport {
    pub form: ConstraintForm,
    pub lhs: Vec<f64>,
    pub normalized_weights: Vec<f64>,
    pub estimated_promotion: Vec<f64>,
    pub predicted_promotion: Vec<f64>,
    pub zero_order: Option<Vec<f64>>,
    pub delta: f64,
    pub weight_sum_predicted: f64,
    pub weight_sum_actual: f64,
}

impl ConstraintReport {
    fn build(
        form: ConstraintForm,
        lhs: Vec<f64>,
        normalized_weights: Vec<f64>,
        estimated_promotion: Vec<f64>,
        predicted_promotion: Vec<f64>,
        zero_order: Option<Vec<f64>>,
        weight_sum_predicted: f64,
        weight_sum_actual: f64,
    ) -> Self {
        let delta = l1_distance(&lhs, &normalized_weights);
        Self {
            form,
            lhs,
            normalized_weights,
            estimated_promotion,
            predicted_promotion,
            zero_order,
            delta,
            weight_sum_predicted,
            weight_sum_actual,
        }
    }

    pub fn channels(&self) -> usize {
        self.lhs.len()
    }

    /// `Σ_i |L_i − w_i/Σ_j w_j|` recomputed from the stored fields.
    pub fn recompute_delta(&self) -> f64 {
        l1_distance(&self.lhs, &self.normalized_weights)
    }

    /// `Σ_i |p̂_i − p_i^pred|`.
    pub fn promotion_residual(&self) -> f64 {
        l1_distance(&self.estimated_promotion, &self.predicted_promotion)
    }

    /// Largest `|p̂_i − p_i^pred|`.
    pub fn max_promotion_deviation(&self) -> f64 {
        self.estimated_promotion
            .iter()
            .zip(&self.predicted_promotion)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn check_shape(state: &EstimatorState, weights: &WeightVector) -> Result<()> {
    if weights.len() != state.channels() {
        return Err(invalid(format!(
            "estimator tracks {} channels but weight vector has {}",
            state.channels(),
            weights.len()
        )));
    }
    Ok(())
}

fn moments(weights: &WeightVector) -> Vec<f64> {
    let l = weights.norm_exponent();
    weights.values().iter().map(|&w| power_moment(w, l)).collect()
}

/// Pure-Hebbian relation between promotion probabilities and weights.
///
/// `L_i = p̂_i (1 − w_i^(l-1) ε) / (1 − ⟨w^(l-1)⟩_p ε)` is compared with
/// `w_i / Σ_j w_j`; the predicted probability is
/// `⟨w^(l-1)⟩_p w_i / (1 − w_i^(l-1) ε)` and the predicted weight sum
/// `(1 − ⟨w^(l-1)⟩_p ε) / ⟨w^(l-1)⟩_p`.
pub fn hebbian_constraint(state: &EstimatorState, weights: &WeightVector, epsilon: f64) -> Result<ConstraintReport> {
    check_shape(state, weights)?;
    if state.total_promotions() <= 0.0 {
        return Err(Error::NoPromotions);
    }
    if state.total_demotions() > 0.0 {
        return Err(invalid("demotions recorded; use the STDP constraint"));
    }
    let p = state.promotion_probabilities();
    let mean = state.mean_moment(Direction::Promotion);
    let m = moments(weights);
    let w = weights.values();
    let den = 1.0 - mean * epsilon;
    let lhs = p.iter().zip(&m).map(|(pi, mi)| pi * (1.0 - mi * epsilon) / den).collect();
    let predicted = w.iter().zip(&m).map(|(wi, mi)| mean * wi / (1.0 - mi * epsilon)).collect();
    Ok(ConstraintReport::build(
        ConstraintForm::Hebbian,
        lhs,
        weights.sum_normalized(),
        p.clone(),
        predicted,
        Some(p),
        den / mean,
        weights.sum(),
    ))
}

/// Symmetric-STDP relation with a constant learning rate `ε`.
///
/// `L_i = [k^p p_i (1 − w_i^(l-1) ε) − k^d q_i (1 + w_i^(l-1) ε)] / D`
/// with `D = k^p (1 − ⟨w^(l-1)⟩_p ε) − k^d (1 + ⟨w^(l-1)⟩_d ε)`. The
/// predicted promotion probability solves the same balance for `p_i`:
/// `[k^d q_i (1 + w_i^(l-1) ε) + w_i (k^p ⟨w^(l-1)⟩_p − k^d ⟨w^(l-1)⟩_d)] / (k^p (1 − w_i^(l-1) ε))`.
pub fn stdp_constraint(state: &EstimatorState, weights: &WeightVector, epsilon: f64) -> Result<ConstraintReport> {
    check_shape(state, weights)?;
    if state.total_promotions() + state.total_demotions() <= 0.0 {
        return Err(Error::NoEvents);
    }
    let (kp, kd) = (state.k_promotion(), state.k_demotion());
    let p = state.promotion_probabilities();
    let q = state.demotion_probabilities();
    let mp = state.mean_moment(Direction::Promotion);
    let md = state.mean_moment(Direction::Demotion);
    let den = kp * (1.0 - mp * epsilon) - kd * (1.0 + md * epsilon);
    if den.abs() < DEGENERATE {
        return Err(Error::DegenerateConstraint(den));
    }
    let m = moments(weights);
    let norm = weights.sum_normalized();
    let lhs = (0..p.len())
        .map(|i| (kp * p[i] * (1.0 - m[i] * epsilon) - kd * q[i] * (1.0 + m[i] * epsilon)) / den)
        .collect();
    let mix = kp * mp - kd * md;
    let w = weights.values();
    let predicted = (0..p.len())
        .map(|i| {
            if kp > 0.0 {
                (kd * q[i] * (1.0 + m[i] * epsilon) + w[i] * mix) / (kp * (1.0 - m[i] * epsilon))
            } else {
                0.0
            }
        })
        .collect();
    let zero_order = (kp != kd).then(|| (0..p.len()).map(|i| (kp * p[i] - kd * q[i]) / (kp - kd)).collect());
    Ok(ConstraintReport::build(
        ConstraintForm::Stdp,
        lhs,
        norm,
        p,
        predicted,
        zero_order,
        den / mix,
        weights.sum(),
    ))
}

/// STDP relation with a time-dependent learning rate, using the
/// channel-specific averages `⟨ε⟩_{·,i}` and `⟨ε²⟩_{·,i}` of the
/// applied steps.
///
/// For a constant kernel every term scales with `ε` and the result
/// coincides with [`stdp_constraint`].
pub fn kernel_stdp_constraint(state: &EstimatorState, weights: &WeightVector) -> Result<ConstraintReport> {
    check_shape(state, weights)?;
    if state.total_promotions() <= 0.0 {
        return Err(Error::NoPromotions);
    }
    let (kp, kd) = (state.k_promotion(), state.k_demotion());
    let p = state.promotion_probabilities();
    let q = state.demotion_probabilities();
    let m = moments(weights);
    let n = p.len();

    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let ai = match (
            state.channel_epsilon(Direction::Promotion, i),
            state.channel_epsilon_sq(Direction::Promotion, i),
        ) {
            (Some(e), Some(e2)) => e - e2 * m[i],
            _ => return Err(Error::VanishingEpsilon(i)),
        };
        if ai.abs() < DEGENERATE * state.mean_epsilon(Direction::Promotion).max(f64::MIN_POSITIVE) {
            return Err(Error::VanishingEpsilon(i));
        }
        a.push(ai);
        let bi = match (
            state.channel_epsilon(Direction::Demotion, i),
            state.channel_epsilon_sq(Direction::Demotion, i),
        ) {
            (Some(e), Some(e2)) => e + e2 * m[i],
            _ => 0.0,
        };
        b.push(bi);
    }

    let mix = kp * state.mean_eps_moment(Direction::Promotion) - kd * state.mean_eps_moment(Direction::Demotion);
    let den = kp * (state.mean_epsilon(Direction::Promotion) - state.mean_eps2_moment(Direction::Promotion))
        - kd * (state.mean_epsilon(Direction::Demotion) + state.mean_eps2_moment(Direction::Demotion));
    let scale = kp * state.mean_epsilon(Direction::Promotion) + kd * state.mean_epsilon(Direction::Demotion);
    if den.abs() < DEGENERATE * scale {
        return Err(Error::DegenerateConstraint(den));
    }

    let w = weights.values();
    let lhs = (0..n).map(|i| (kp * p[i] * a[i] - kd * q[i] * b[i]) / den).collect();
    let predicted = (0..n).map(|i| (kd * q[i] * b[i] + w[i] * mix) / (kp * a[i])).collect();
    let zero_order = (kp != kd).then(|| (0..n).map(|i| (kp * p[i] - kd * q[i]) / (kp - kd)).collect());
    Ok(ConstraintReport::build(
        ConstraintForm::KernelStdp,
        lhs,
        weights.sum_normalized(),
        p,
        predicted,
        zero_order,
        den / mix,
        weights.sum(),
    ))
}

/// Decay-model steady state: `w_i = (ε/δ) p_i`, so `L_i = p̂_i` and the
/// weights are normalized against the predicted sum `ε/δ`.
pub fn decay_constraint(
    state: &EstimatorState,
    weights: &WeightVector,
    epsilon: f64,
    decay: f64,
) -> Result<ConstraintReport> {
    check_shape(state, weights)?;
    if state.total_promotions() <= 0.0 {
        return Err(Error::NoPromotions);
    }
    if !(decay > 0.0 && decay < 1.0) || !(epsilon > 0.0) {
        return Err(invalid(format!("decay model needs ε > 0 and δ in (0, 1), got ε={epsilon}, δ={decay}")));
    }
    let sum = epsilon / decay;
    let p = state.promotion_probabilities();
    let norm: Vec<f64> = weights.values().iter().map(|w| w / sum).collect();
    Ok(ConstraintReport::build(
        ConstraintForm::Decay,
        p.clone(),
        norm.clone(),
        p.clone(),
        norm,
        Some(p),
        sum,
        weights.sum(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::WindowMode;
    use crate::plasticity::UpdateEvent;
    use proptest::prelude::*;

    fn ev(channel: usize, direction: Direction, eps: f64) -> UpdateEvent {
        UpdateEvent { channel, direction, offset: 0.0, applied_epsilon: eps, weight_before: 0.0 }
    }

    fn filled(w: &WeightVector, events: &[(usize, Direction, f64)]) -> EstimatorState {
        let mut s = EstimatorState::new(w.len(), w.norm_exponent(), WindowMode::Cumulative).unwrap();
        for &(c, d, e) in events {
            s.record(&ev(c, d, e), w);
        }
        s
    }

    #[test]
    fn single_channel_hebbian() {
        for l in [1.0, 2.0, 3.0] {
            let w = WeightVector::uniform(1, l).unwrap();
            let s = filled(&w, &[(0, Direction::Promotion, 0.01); 5]);
            let r = hebbian_constraint(&s, &w, 0.01).unwrap();
            assert!((r.lhs[0] - 1.0).abs() < 1e-15);
            assert!(r.delta < 1e-15);
        }
    }

    #[test]
    fn hebbian_l1_reduces_to_weights() {
        let w = WeightVector::new(vec![0.3, 0.7], 1.0).unwrap();
        let mut events = vec![(0, Direction::Promotion, 0.001); 3];
        events.extend(vec![(1, Direction::Promotion, 0.001); 7]);
        let r = hebbian_constraint(&filled(&w, &events), &w, 0.001).unwrap();
        assert!((r.predicted_promotion[0] - 0.3 / 0.999).abs() < 1e-15);
        assert!((r.lhs[0] - 0.3).abs() < 1e-15);
        assert!(r.delta < 1e-15);
        assert!((r.weight_sum_predicted - 0.999).abs() < 1e-15);
    }

    #[test]
    fn hebbian_needs_promotions() {
        let w = WeightVector::uniform(2, 1.0).unwrap();
        let s = filled(&w, &[]);
        assert!(matches!(hebbian_constraint(&s, &w, 0.01), Err(Error::NoPromotions)));
    }

    #[test]
    fn stdp_without_demotions_matches_hebbian() {
        let w = WeightVector::normalized(vec![0.2, 0.5, 0.9], 2.0).unwrap();
        let events = [(0, Direction::Promotion, 0.01), (1, Direction::Promotion, 0.01), (2, Direction::Promotion, 0.01), (2, Direction::Promotion, 0.01)];
        let s = filled(&w, &events);
        let h = hebbian_constraint(&s, &w, 0.01).unwrap();
        let t = stdp_constraint(&s, &w, 0.01).unwrap();
        for i in 0..3 {
            assert!((h.lhs[i] - t.lhs[i]).abs() < 1e-15);
            assert!((h.predicted_promotion[i] - t.predicted_promotion[i]).abs() < 1e-12);
        }
        assert!((h.weight_sum_predicted - t.weight_sum_predicted).abs() < 1e-12);
    }

    #[test]
    fn balanced_stdp_is_degenerate() {
        let w = WeightVector::uniform(2, 1.0).unwrap();
        let events = [
            (0, Direction::Promotion, 0.0),
            (1, Direction::Promotion, 0.0),
            (0, Direction::Demotion, 0.0),
            (1, Direction::Demotion, 0.0),
        ];
        let s = filled(&w, &events);
        assert!(matches!(stdp_constraint(&s, &w, 0.0), Err(Error::DegenerateConstraint(_))));
    }

    #[test]
    fn kernel_single_channel() {
        let w = WeightVector::uniform(1, 1.0).unwrap();
        let s = filled(&w, &[(0, Direction::Promotion, 0.01), (0, Direction::Promotion, 0.03)]);
        let r = kernel_stdp_constraint(&s, &w).unwrap();
        assert!((r.lhs[0] - 1.0).abs() < 1e-15);
        assert!((r.estimated_promotion[0] - 1.0).abs() < 1e-15);
        assert!((r.predicted_promotion[0] - 1.0).abs() < 0.03);
    }

    #[test]
    fn kernel_hebbian_prediction() {
        let w = WeightVector::normalized(vec![0.2, 0.5, 0.9], 2.0).unwrap();
        let events = [
            (0, Direction::Promotion, 0.010),
            (1, Direction::Promotion, 0.020),
            (2, Direction::Promotion, 0.005),
            (2, Direction::Promotion, 0.015),
        ];
        let s = filled(&w, &events);
        let r = kernel_stdp_constraint(&s, &w).unwrap();
        let mix = s.mean_eps_moment(Direction::Promotion);
        for (i, &(_, _, _)) in events.iter().take(3).enumerate() {
            let e = s.channel_epsilon(Direction::Promotion, i).unwrap();
            let e2 = s.channel_epsilon_sq(Direction::Promotion, i).unwrap();
            let wi = w.values()[i];
            let exact = mix * wi / (e - e2 * wi);
            assert!((r.predicted_promotion[i] - exact).abs() < 1e-12);
            let zeroth = mix * wi / e;
            assert!((r.predicted_promotion[i] - zeroth).abs() < 0.05 * zeroth);
        }
    }

    #[test]
    fn kernel_requires_every_channel_promoted() {
        let w = WeightVector::uniform(2, 1.0).unwrap();
        let s = filled(&w, &[(0, Direction::Promotion, 0.01)]);
        assert!(matches!(kernel_stdp_constraint(&s, &w), Err(Error::VanishingEpsilon(1))));
    }

    #[test]
    fn decay_single_channel() {
        let w = WeightVector::new(vec![0.1], 1.0).unwrap();
        let s = filled(&w, &[(0, Direction::Promotion, 0.001)]);
        let r = decay_constraint(&s, &w, 0.001, 0.01).unwrap();
        assert_eq!(r.lhs, vec![1.0]);
        assert!(r.delta < 1e-15);
        assert_eq!(r.weight_sum_predicted, 0.1);
    }

    fn arb_case() -> impl Strategy<Value = (Vec<f64>, f64, Vec<(usize, bool)>, f64)> {
        (2usize..6)
            .prop_flat_map(|n| {
                (
                    proptest::collection::vec(0.05f64..1.0, n),
                    prop_oneof![Just(1.0), Just(2.0), Just(3.0)],
                    proptest::collection::vec((0..n, proptest::bool::weighted(0.8)), 20..200),
                    prop_oneof![Just(1e-3), Just(1e-4)],
                )
            })
    }

    proptest! {
        #[test]
        fn constant_kernel_reduces_to_stdp((w, l, events, eps) in arb_case()) {
            let w = WeightVector::normalized(w, l).unwrap();
            let mut events: Vec<_> = events.into_iter().map(|(c, p)| (c, if p { Direction::Promotion } else { Direction::Demotion }, eps)).collect();
            for c in 0..w.len() {
                events.push((c, Direction::Promotion, eps));
            }
            let s = filled(&w, &events);
            let a = stdp_constraint(&s, &w, eps).unwrap();
            let b = kernel_stdp_constraint(&s, &w).unwrap();
            for i in 0..w.len() {
                prop_assert!((a.lhs[i] - b.lhs[i]).abs() < 1e-9);
                prop_assert!((a.predicted_promotion[i] - b.predicted_promotion[i]).abs() < 1e-9);
            }
            prop_assert!((a.delta - b.delta).abs() < 1e-8);
        }

        #[test]
        fn delta_matches_fields((w, l, events, eps) in arb_case()) {
            let w = WeightVector::normalized(w, l).unwrap();
            let events: Vec<_> = events.into_iter().map(|(c, p)| (c, if p { Direction::Promotion } else { Direction::Demotion }, eps)).collect();
            let s = filled(&w, &events);
            if let Ok(r) = stdp_constraint(&s, &w, eps) {
                prop_assert!(r.delta >= 0.0);
                prop_assert_eq!(r.delta, r.recompute_delta());
                let gap = s.k_promotion() - s.k_demotion();
                if let (Some(z), true) = (&r.zero_order, gap.abs() > 0.2) {
                    let bound = 2.0 * eps / gap.abs();
                    let scale = r.lhs.iter().chain(z).fold(1.0f64, |m, x| m.max(x.abs()));
                    for i in 0..w.len() {
                        prop_assert!((r.lhs[i] - z[i]).abs() <= bound * scale * 1.01);
                    }
                }
            }
        }
    }
}

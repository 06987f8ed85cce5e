use std::collections::VecDeque;

use crate::error::{invalid, Result};
use crate::plasticity::{power_moment, Direction, UpdateEvent, WeightVector};

/// How far back the estimators look.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WindowMode {
    Cumulative,
    /// The most recent `n` update events (promotions and demotions together).
    Sliding(usize),
    /// Every accumulator is multiplied by the factor before each new event.
    Exponential(f64),
}

impl Default for WindowMode {
    fn default() -> Self {
        WindowMode::Sliding(5000)
    }
}

#[derive(Clone, Copy, Debug)]
struct Record {
    channel: usize,
    direction: Direction,
    eps: f64,
    moment: f64,
}

/// Accumulated statistics for one update direction.
#[derive(Clone, Debug)]
struct Tally {
    counts: Vec<f64>,
    exact: Vec<u64>,
    exact_total: u64,
    eps: Vec<f64>,
    eps2: Vec<f64>,
    total: f64,
    eps_sum: f64,
    moment: f64,
    eps_moment: f64,
    eps2_moment: f64,
}

impl Tally {
    fn new(channels: usize) -> Self {
        Self {
            counts: vec![0.0; channels],
            exact: vec![0; channels],
            exact_total: 0,
            eps: vec![0.0; channels],
            eps2: vec![0.0; channels],
            total: 0.0,
            eps_sum: 0.0,
            moment: 0.0,
            eps_moment: 0.0,
            eps2_moment: 0.0,
        }
    }

    fn add(&mut self, r: &Record, sign: f64) {
        let c = r.channel;
        self.counts[c] += sign;
        self.total += sign;
        if sign > 0.0 {
            self.exact[c] += 1;
            self.exact_total += 1;
        } else {
            self.exact[c] -= 1;
            self.exact_total -= 1;
        }
        self.eps[c] += sign * r.eps;
        self.eps2[c] += sign * r.eps * r.eps;
        self.eps_sum += sign * r.eps;
        self.moment += sign * r.moment;
        self.eps_moment += sign * r.moment * r.eps;
        self.eps2_moment += sign * r.moment * r.eps * r.eps;
    }

    fn scale(&mut self, f: f64) {
        for v in self.counts.iter_mut().chain(&mut self.eps).chain(&mut self.eps2) {
            *v *= f;
        }
        self.total *= f;
        self.eps_sum *= f;
        self.moment *= f;
        self.eps_moment *= f;
        self.eps2_moment *= f;
    }
}

/// Online estimates of `p_i`, `q_i`, `k^p`, `k^d` and the event-weighted
/// averages the steady-state relations are built from.
///
/// Weight moments `w^(l-1)` are taken from the weight of the affected
/// channel just before each event.
#[derive(Clone, Debug)]
pub struct EstimatorState {
    channels: usize,
    norm_exponent: f64,
    mode: WindowMode,
    promotions: Tally,
    demotions: Tally,
    buffer: VecDeque<Record>,
    weight_buffer: VecDeque<f64>,
    weight_sums: Vec<f64>,
    weight_total: f64,
    evictions: usize,
}

impl EstimatorState {
    pub fn new(channels: usize, norm_exponent: f64, mode: WindowMode) -> Result<Self> {
        if channels == 0 {
            return Err(invalid("estimator needs at least one channel"));
        }
        match mode {
            WindowMode::Sliding(0) => return Err(invalid("sliding window length must be > 0")),
            WindowMode::Exponential(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(invalid(format!("exponential window factor must lie in (0, 1], got {f}")))
            }
            _ => {}
        }
        Ok(Self {
            channels,
            norm_exponent,
            mode,
            promotions: Tally::new(channels),
            demotions: Tally::new(channels),
            buffer: VecDeque::new(),
            weight_buffer: VecDeque::new(),
            weight_sums: vec![0.0; channels],
            weight_total: 0.0,
            evictions: 0,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn norm_exponent(&self) -> f64 {
        self.norm_exponent
    }

    pub fn mode(&self) -> WindowMode {
        self.mode
    }

    pub fn record(&mut self, event: &UpdateEvent, weights_before: &WeightVector) {
        let w = weights_before.values()[event.channel];
        let r = Record {
            channel: event.channel,
            direction: event.direction,
            eps: event.applied_epsilon,
            moment: power_moment(w, self.norm_exponent),
        };
        let before = weights_before.values();
        match self.mode {
            WindowMode::Cumulative => {
                self.tally_mut(r.direction).add(&r, 1.0);
                self.add_weights(before, 1.0);
            }
            WindowMode::Exponential(f) => {
                self.promotions.scale(f);
                self.demotions.scale(f);
                self.weight_sums.iter_mut().for_each(|w| *w *= f);
                self.weight_total *= f;
                self.tally_mut(r.direction).add(&r, 1.0);
                self.add_weights(before, 1.0);
            }
            WindowMode::Sliding(n) => {
                self.tally_mut(r.direction).add(&r, 1.0);
                self.add_weights(before, 1.0);
                self.buffer.push_back(r);
                self.weight_buffer.extend(before);
                if self.buffer.len() > n {
                    let old = self.buffer.pop_front().expect("non-empty");
                    self.tally_mut(old.direction).add(&old, -1.0);
                    let stale: Vec<f64> = self.weight_buffer.drain(..self.channels).collect();
                    self.add_weights(&stale, -1.0);
                    self.evictions += 1;
                    if self.evictions >= n {
                        self.rebuild();
                    }
                }
            }
        }
    }

    fn add_weights(&mut self, weights: &[f64], sign: f64) {
        for (s, w) in self.weight_sums.iter_mut().zip(weights) {
            *s += sign * w;
        }
        self.weight_total += sign;
    }

    /// Recomputes floating-point sums from the buffer to shed the rounding
    /// left behind by subtractions.
    fn rebuild(&mut self) {
        self.promotions = Tally::new(self.channels);
        self.demotions = Tally::new(self.channels);
        let buffer = std::mem::take(&mut self.buffer);
        for r in &buffer {
            self.tally_mut(r.direction).add(r, 1.0);
        }
        self.buffer = buffer;
        self.weight_sums.fill(0.0);
        self.weight_total = 0.0;
        let weights = std::mem::take(&mut self.weight_buffer);
        for chunk in weights.iter().copied().collect::<Vec<_>>().chunks(self.channels) {
            self.add_weights(chunk, 1.0);
        }
        self.weight_buffer = weights;
        self.evictions = 0;
    }

    /// Weight vector averaged over the recorded events (pre-update values);
    /// `None` before the first event.
    pub fn mean_weights(&self) -> Option<Vec<f64>> {
        (self.weight_total > 0.0).then(|| self.weight_sums.iter().map(|s| s / self.weight_total).collect())
    }

    fn tally(&self, d: Direction) -> &Tally {
        match d {
            Direction::Promotion => &self.promotions,
            Direction::Demotion => &self.demotions,
        }
    }

    fn tally_mut(&mut self, d: Direction) -> &mut Tally {
        match d {
            Direction::Promotion => &mut self.promotions,
            Direction::Demotion => &mut self.demotions,
        }
    }

    /// Effective event count (integer-valued except in exponential mode).
    pub fn total(&self, d: Direction) -> f64 {
        self.tally(d).total
    }

    pub fn total_promotions(&self) -> f64 {
        self.promotions.total
    }

    pub fn total_demotions(&self) -> f64 {
        self.demotions.total
    }

    /// Integer counters per channel and in total. For cumulative and
    /// sliding windows these are the counts in the window; the exponential
    /// window reports every event ever recorded.
    pub fn exact_counts(&self, d: Direction) -> (&[u64], u64) {
        let t = self.tally(d);
        (&t.exact, t.exact_total)
    }

    /// Per-channel counts add up to the total, checked on the integers.
    pub fn counts_consistent(&self) -> bool {
        [Direction::Promotion, Direction::Demotion].iter().all(|d| {
            let (per, total) = self.exact_counts(*d);
            per.iter().sum::<u64>() == total
        })
    }

    /// `p̂_i` (or `q̂_i`); all zeros when no event of that kind was seen.
    pub fn probabilities(&self, d: Direction) -> Vec<f64> {
        let t = self.tally(d);
        if t.total > 0.0 {
            t.counts.iter().map(|c| c / t.total).collect()
        } else {
            vec![0.0; self.channels]
        }
    }

    pub fn promotion_probabilities(&self) -> Vec<f64> {
        self.probabilities(Direction::Promotion)
    }

    pub fn demotion_probabilities(&self) -> Vec<f64> {
        self.probabilities(Direction::Demotion)
    }

    /// `k̂^p`; zero when nothing was recorded.
    pub fn k_promotion(&self) -> f64 {
        let all = self.promotions.total + self.demotions.total;
        if all > 0.0 {
            self.promotions.total / all
        } else {
            0.0
        }
    }

    pub fn k_demotion(&self) -> f64 {
        let all = self.promotions.total + self.demotions.total;
        if all > 0.0 {
            self.demotions.total / all
        } else {
            0.0
        }
    }

    fn mean(num: f64, den: f64) -> f64 {
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// `⟨w^(l-1)⟩` over events of direction `d`.
    pub fn mean_moment(&self, d: Direction) -> f64 {
        let t = self.tally(d);
        Self::mean(t.moment, t.total)
    }

    /// `⟨w^(l-1) ε⟩` over events of direction `d`.
    pub fn mean_eps_moment(&self, d: Direction) -> f64 {
        let t = self.tally(d);
        Self::mean(t.eps_moment, t.total)
    }

    /// `⟨ε² w^(l-1)⟩` over events of direction `d`.
    pub fn mean_eps2_moment(&self, d: Direction) -> f64 {
        let t = self.tally(d);
        Self::mean(t.eps2_moment, t.total)
    }

    /// `⟨ε⟩` over events of direction `d`.
    pub fn mean_epsilon(&self, d: Direction) -> f64 {
        let t = self.tally(d);
        Self::mean(t.eps_sum, t.total)
    }

    /// `⟨ε⟩` over every event in the window.
    pub fn mean_epsilon_all(&self) -> f64 {
        Self::mean(self.promotions.eps_sum + self.demotions.eps_sum, self.promotions.total + self.demotions.total)
    }

    /// Channel-specific `⟨ε⟩_{d,i}`; `None` when the channel has no events.
    pub fn channel_epsilon(&self, d: Direction, channel: usize) -> Option<f64> {
        let t = self.tally(d);
        (t.counts[channel] > 0.0).then(|| t.eps[channel] / t.counts[channel])
    }

    /// Channel-specific `⟨ε²⟩_{d,i}`.
    pub fn channel_epsilon_sq(&self, d: Direction, channel: usize) -> Option<f64> {
        let t = self.tally(d);
        (t.counts[channel] > 0.0).then(|| t.eps2[channel] / t.counts[channel])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn event(channel: usize, direction: Direction, eps: f64) -> UpdateEvent {
        UpdateEvent { channel, direction, offset: 0.0, applied_epsilon: eps, weight_before: 0.25 }
    }

    fn weights(n: usize) -> WeightVector {
        WeightVector::uniform(n, 1.0).unwrap()
    }

    #[test]
    fn single_promotion() {
        let mut s = EstimatorState::new(4, 1.0, WindowMode::Cumulative).unwrap();
        s.record(&event(2, Direction::Promotion, 0.01), &weights(4));
        assert_eq!(s.promotion_probabilities(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(s.k_promotion(), 1.0);
        assert_eq!(s.k_demotion(), 0.0);
    }

    #[test]
    fn symmetric_counts() {
        let mut s = EstimatorState::new(2, 1.0, WindowMode::Cumulative).unwrap();
        for k in 0..100 {
            s.record(&event(k % 2, Direction::Promotion, 0.01), &weights(2));
        }
        assert_eq!(s.promotion_probabilities(), vec![0.5, 0.5]);
    }

    #[test]
    fn balanced_directions() {
        let mut s = EstimatorState::new(3, 1.0, WindowMode::Cumulative).unwrap();
        for k in 0..30 {
            let d = if k % 2 == 0 { Direction::Promotion } else { Direction::Demotion };
            s.record(&event(k % 3, d, 0.01), &weights(3));
        }
        assert_eq!(s.k_promotion(), 0.5);
        assert_eq!(s.k_demotion(), 0.5);
    }

    #[test]
    fn sliding_window_forgets() {
        let mut s = EstimatorState::new(2, 1.0, WindowMode::Sliding(10)).unwrap();
        for _ in 0..50 {
            s.record(&event(0, Direction::Promotion, 0.01), &weights(2));
        }
        for _ in 0..10 {
            s.record(&event(1, Direction::Promotion, 0.02), &weights(2));
        }
        assert_eq!(s.promotion_probabilities(), vec![0.0, 1.0]);
        assert_eq!(s.total_promotions(), 10.0);
        assert!((s.mean_epsilon(Direction::Promotion) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn exponential_window_weights_recent_events() {
        let mut s = EstimatorState::new(2, 1.0, WindowMode::Exponential(0.5)).unwrap();
        s.record(&event(0, Direction::Promotion, 0.01), &weights(2));
        s.record(&event(1, Direction::Promotion, 0.01), &weights(2));
        let p = s.promotion_probabilities();
        assert!((p[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn moments_use_pre_update_weight() {
        let mut s = EstimatorState::new(2, 3.0, WindowMode::Cumulative).unwrap();
        let w = WeightVector::new(vec![0.5, 0.2], 3.0).unwrap();
        s.record(&event(0, Direction::Promotion, 0.1), &w);
        s.record(&event(1, Direction::Promotion, 0.1), &w);
        assert!((s.mean_moment(Direction::Promotion) - (0.25 + 0.04) / 2.0).abs() < 1e-15);
        assert!((s.mean_eps_moment(Direction::Promotion) - 0.1 * (0.25 + 0.04) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_modes() {
        assert!(EstimatorState::new(2, 1.0, WindowMode::Sliding(0)).is_err());
        assert!(EstimatorState::new(2, 1.0, WindowMode::Exponential(1.5)).is_err());
        assert!(EstimatorState::new(0, 1.0, WindowMode::Cumulative).is_err());
    }

    proptest! {
        #[test]
        fn probabilities_are_normalized(
            events in proptest::collection::vec((0usize..5, any::<bool>(), 1e-5f64..0.1), 1..600),
            window in prop_oneof![Just(WindowMode::Cumulative), (1usize..50).prop_map(WindowMode::Sliding)],
        ) {
            let mut s = EstimatorState::new(5, 1.0, window).unwrap();
            let w = weights(5);
            for (c, promote, eps) in events {
                let d = if promote { Direction::Promotion } else { Direction::Demotion };
                s.record(&event(c, d, eps), &w);
            }
            prop_assert!(s.counts_consistent());
            let (_, np) = s.exact_counts(Direction::Promotion);
            let (_, nd) = s.exact_counts(Direction::Demotion);
            prop_assert_eq!(np as f64, s.total_promotions());
            prop_assert_eq!(nd as f64, s.total_demotions());
            for d in [Direction::Promotion, Direction::Demotion] {
                let p = s.probabilities(d);
                prop_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
                if s.total(d) > 0.0 {
                    prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
            prop_assert!((s.k_promotion() + s.k_demotion() - 1.0).abs() < 1e-15);
        }
    }
}

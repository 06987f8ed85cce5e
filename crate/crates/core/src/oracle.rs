//! Learning-free ground truth for promotion probabilities.
//!
//! Two independent methods: exhaustive enumeration of every two-channel
//! input sequence of a fixed length with sampled waiting times, and Monte
//! Carlo runs of the neuron with frozen weights.

use crate::error::{invalid, Error, Result};
use crate::estimators::{EstimatorState, WindowMode};
use crate::exec::Execution;
use crate::inputs::{PoissonStream, RateSpec};
use crate::neuron::{run, NeuronState, RunOptions};
use crate::plasticity::{Direction, EpsilonKernel, Learner, PlasticityRule, UpdateEvent, UpdateObserver, WeightVector};
use crate::rng::{self, streams};

/// Sequences that never reach threshold may make up at most this share
/// before enumeration is refused.
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationConfig {
    /// `[w_1, w_2]`, summing to 1.
    pub weights: [f64; 2],
    pub threshold: f64,
    pub decay: f64,
    pub max_sequence_length: usize,
    /// Rate of the exponential waiting times between consecutive spikes.
    pub rate: f64,
    pub seed: u64,
    pub tolerance: f64,
    /// Longest sequence length to grow to when too many sequences stay
    /// below threshold; `None` disables growing.
    pub grow_to: Option<usize>,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self {
            weights: [0.5, 0.5],
            threshold: 0.94,
            decay: 0.0,
            max_sequence_length: 13,
            rate: 1.8,
            seed: 0,
            tolerance: DEFAULT_TOLERANCE,
            grow_to: Some(20),
        }
    }
}

impl EnumerationConfig {
    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.weights;
        if !(a >= 0.0 && b >= 0.0 && (a + b - 1.0).abs() <= 1e-12) {
            return Err(invalid(format!("enumeration weights must be >= 0 and sum to 1, got [{a}, {b}]")));
        }
        if !(self.threshold > 0.0) || !(self.decay >= 0.0) {
            return Err(invalid("threshold must be > 0 and decay >= 0"));
        }
        if !(1..=30).contains(&self.max_sequence_length) {
            return Err(invalid(format!("sequence length must lie in 1..=30, got {}", self.max_sequence_length)));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::InvalidRate(self.rate));
        }
        if !(0.0..1.0).contains(&self.tolerance) {
            return Err(invalid(format!("tolerance must lie in [0, 1), got {}", self.tolerance)));
        }
        Ok(())
    }
}

/// Waiting times for every sequence of one length: row `s` holds the
/// intervals preceding each spike of sequence `s`. Reusing one table over a
/// weight grid keeps the resulting curve free of sampling jitter.
#[derive(Clone, Debug)]
pub struct WaitingTimes {
    length: usize,
    times: Vec<f64>,
}

impl WaitingTimes {
    pub fn sample(length: usize, rate: f64, seed: u64) -> Self {
        let mut r = rng::stream(seed, streams::ENUMERATION);
        let times = (0..(length << length)).map(|_| rng::exponential(&mut r, rate)).collect();
        Self { length, times }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn sequences(&self) -> usize {
        1 << self.length
    }

    fn row(&self, s: usize) -> &[f64] {
        &self.times[s * self.length..(s + 1) * self.length]
    }
}

/// Outcome of enumerating all sequences for one weight pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Enumeration {
    pub p1: f64,
    /// Sequences ending in a threshold crossing.
    pub truncated: u64,
    /// Sequences that stayed below threshold.
    pub untruncated: u64,
    pub length: usize,
}

impl Enumeration {
    pub fn total(&self) -> u64 {
        self.truncated + self.untruncated
    }
}

fn sequence_label(s: usize, length: usize) -> String {
    (0..length).map(|k| if (s >> k) & 1 == 0 { '1' } else { '2' }).collect()
}

/// Plays every sequence in `table` through a frozen two-channel neuron.
/// Bit `k` of the sequence index selects the channel of spike `k`
/// (0 for the first channel). Untruncated sequences are left out of `p1`.
pub fn enumerate_with(table: &WaitingTimes, w1: f64, threshold: f64, decay: f64, tolerance: f64) -> Result<Enumeration> {
    let w = [w1, 1.0 - w1];
    let mut hits = 0u64;
    let mut truncated = 0u64;
    let mut first_miss = None;
    for s in 0..table.sequences() {
        let waits = table.row(s);
        let mut v = 0.0f64;
        let mut trigger = None;
        for (k, &dt) in waits.iter().enumerate() {
            if decay > 0.0 {
                v *= (-decay * dt).exp();
            }
            let c = (s >> k) & 1;
            v += w[c];
            if v >= threshold {
                trigger = Some(c);
                break;
            }
        }
        match trigger {
            Some(c) => {
                truncated += 1;
                hits += (c == 0) as u64;
            }
            None => {
                first_miss.get_or_insert(s);
            }
        }
    }
    let total = table.sequences() as u64;
    let untruncated = total - truncated;
    if truncated == 0 || untruncated as f64 > tolerance * total as f64 {
        return Err(Error::NeverCrosses {
            sequence: sequence_label(first_miss.unwrap_or(0), table.length()),
            length: table.length(),
            untruncated,
            total,
        });
    }
    Ok(Enumeration { p1: hits as f64 / truncated as f64, truncated, untruncated, length: table.length() })
}

fn grown<T>(config: &EnumerationConfig, mut attempt: impl FnMut(&WaitingTimes) -> Result<T>) -> Result<T> {
    config.validate()?;
    let mut length = config.max_sequence_length;
    loop {
        let table = WaitingTimes::sample(length, config.rate, config.seed);
        match attempt(&table) {
            Err(Error::NeverCrosses { .. }) if config.grow_to.is_some_and(|g| length < g) => length += 1,
            other => return other,
        }
    }
}

/// Enumeration with the configured length, grown if allowed.
pub fn enumerate(config: &EnumerationConfig) -> Result<Enumeration> {
    grown(config, |t| enumerate_with(t, config.weights[0], config.threshold, config.decay, config.tolerance))
}

/// Fraction of enumerated threshold crossings triggered by the first channel.
pub fn enumerate_p1(config: &EnumerationConfig) -> Result<f64> {
    enumerate(config).map(|e| e.p1)
}

/// `p_1` on a list of `w_1` values against one shared waiting-time table.
pub fn enumerate_curve(config: &EnumerationConfig, grid: &[f64], exec: Execution) -> Result<Vec<Enumeration>> {
    grown(config, |t| {
        exec.try_map(grid.len(), |k| enumerate_with(t, grid[k], config.threshold, config.decay, config.tolerance))
    })
}

/// `n` evenly spaced points on `[0, 1]`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n).map(|k| k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeuronConfig {
    pub threshold: f64,
    pub decay: f64,
}

impl Default for NeuronConfig {
    fn default() -> Self {
        Self { threshold: 0.94, decay: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloConfig {
    pub neuron: NeuronConfig,
    pub rates: RateSpec,
    /// Promotion window; 0 attributes each output to its triggering spike.
    pub window: f64,
    pub output_spikes: usize,
    /// Give up after this many input events.
    pub event_budget: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarlo {
    pub p: Vec<f64>,
    pub promotions: u64,
    pub output_spikes: usize,
}

struct Counter(EstimatorState);

impl UpdateObserver for Counter {
    fn observe(&mut self, event: &UpdateEvent, before: &WeightVector) {
        self.0.record(event, before);
    }
}

/// Promotion probabilities from a simulation with learning switched off.
pub fn monte_carlo_p(weights: &WeightVector, config: &MonteCarloConfig) -> Result<MonteCarlo> {
    if config.rates.channels() != weights.len() {
        return Err(invalid(format!("{} rates for {} weights", config.rates.channels(), weights.len())));
    }
    if config.output_spikes == 0 {
        return Err(invalid("need at least one output spike"));
    }
    let kernel = EpsilonKernel::constant(1.0, config.window)?;
    let rule = PlasticityRule::hebbian(kernel, weights.norm_exponent())?;
    let counter = Counter(EstimatorState::new(weights.len(), weights.norm_exponent(), WindowMode::Cumulative)?);
    let mut learner = Learner::new(rule, config.seed, counter).frozen().stop_after(config.output_spikes);
    let input = PoissonStream::new(config.rates.clone(), f64::INFINITY, config.seed)?;
    let options = RunOptions { max_events: Some(config.event_budget), ..Default::default() };
    let state = NeuronState::new(config.neuron.threshold, config.neuron.decay)?;
    let trace = run(input, state, weights.clone(), &mut learner, &options)?;
    if trace.outputs.is_empty() {
        return Err(Error::NoOutput(config.event_budget));
    }
    let counts = learner.into_observer().0;
    let (_, promotions) = counts.exact_counts(Direction::Promotion);
    if promotions == 0 {
        return Err(Error::NoPromotions);
    }
    Ok(MonteCarlo { p: counts.promotion_probabilities(), promotions, output_spikes: trace.outputs.len() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Stable,
    Unstable,
    Absorbing,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Stable => "stable",
            Classification::Unstable => "unstable",
            Classification::Absorbing => "absorbing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub w1: f64,
    pub p1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub w1: f64,
    pub p1: f64,
    pub classification: Classification,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scan {
    pub curve: Vec<CurvePoint>,
    pub crossings: Vec<Crossing>,
    pub sequence_length: usize,
}

impl Scan {
    /// Classification attached to each grid point: the crossing nearest to
    /// it among those closer to it than to any other grid point.
    pub fn point_labels(&self) -> Vec<Option<Classification>> {
        let mut labels = vec![None; self.curve.len()];
        for c in &self.crossings {
            let k = self
                .curve
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1.w1 - c.w1).abs().total_cmp(&(b.1.w1 - c.w1).abs()))
                .map(|(k, _)| k);
            if let Some(k) = k {
                labels[k].get_or_insert(c.classification);
            }
        }
        labels
    }

    pub fn stable(&self) -> impl Iterator<Item = &Crossing> {
        self.crossings.iter().filter(|c| c.classification == Classification::Stable)
    }

    pub fn unstable(&self) -> impl Iterator<Item = &Crossing> {
        self.crossings.iter().filter(|c| c.classification == Classification::Unstable)
    }

    /// Largest decrease of `p_1` between consecutive grid points.
    pub fn monotonicity_violation(&self) -> f64 {
        self.curve.windows(2).map(|w| w[0].p1 - w[1].p1).fold(0.0, f64::max)
    }
}

const ZERO_BAND: f64 = 1e-12;

fn side(p: &CurvePoint) -> i8 {
    let g = p.p1 - p.w1;
    if g > ZERO_BAND {
        1
    } else if g < -ZERO_BAND {
        -1
    } else {
        0
    }
}

/// Diagonal crossings of a sampled `p_1(w_1)` curve.
///
/// Interior points are walked left to right; a change of sign of
/// `p_1 − w_1` between consecutive nonzero points is a crossing (from above
/// is stable, from below unstable). Points exactly on the diagonal between
/// them locate the crossing, otherwise it is interpolated linearly. Grid
/// points at `w_1 = 0` and `w_1 = 1` are absorbing.
pub fn classify_crossings(curve: &[CurvePoint]) -> Vec<Crossing> {
    let mut out = Vec::new();
    let is_end = |p: &CurvePoint| p.w1 <= 0.0 || p.w1 >= 1.0;
    if let Some(first) = curve.first().filter(|p| is_end(p) && p.w1 <= 0.0) {
        out.push(Crossing { w1: first.w1, p1: first.p1, classification: Classification::Absorbing });
    }
    let interior: Vec<&CurvePoint> = curve.iter().filter(|p| !is_end(p)).collect();
    let mut last: Option<usize> = None;
    for (k, p) in interior.iter().enumerate() {
        let s = side(p);
        if s == 0 {
            continue;
        }
        if let Some(j) = last {
            let a = interior[j];
            let sa = side(a);
            if sa != s {
                let zeros = &interior[j + 1..k];
                let (w1, p1) = if zeros.is_empty() {
                    let (ga, gb) = (a.p1 - a.w1, p.p1 - p.w1);
                    let t = ga / (ga - gb);
                    let w = a.w1 + t * (p.w1 - a.w1);
                    (w, w)
                } else {
                    let w = zeros.iter().map(|z| z.w1).sum::<f64>() / zeros.len() as f64;
                    let q = zeros.iter().map(|z| z.p1).sum::<f64>() / zeros.len() as f64;
                    (w, q)
                };
                let classification = if sa > 0 { Classification::Stable } else { Classification::Unstable };
                out.push(Crossing { w1, p1, classification });
            }
        }
        last = Some(k);
    }
    if let Some(end) = curve.last().filter(|p| p.w1 >= 1.0) {
        out.push(Crossing { w1: end.w1, p1: end.p1, classification: Classification::Absorbing });
    }
    out
}

/// Evaluates `p_1` by enumeration on `resolution` evenly spaced `w_1`
/// values in `[0, 1]` and classifies the diagonal crossings.
pub fn fixed_point_scan(config: &EnumerationConfig, resolution: usize, exec: Execution) -> Result<Scan> {
    if resolution < 2 {
        return Err(invalid(format!("scan needs at least 2 grid points, got {resolution}")));
    }
    let grid = unit_grid(resolution);
    let points = enumerate_curve(config, &grid, exec)?;
    let curve: Vec<CurvePoint> = grid.iter().zip(&points).map(|(&w1, e)| CurvePoint { w1, p1: e.p1 }).collect();
    Ok(Scan {
        crossings: classify_crossings(&curve),
        sequence_length: points.first().map_or(config.max_sequence_length, |e| e.length),
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(w1: f64, decay: f64) -> EnumerationConfig {
        EnumerationConfig { weights: [w1, 1.0 - w1], decay, ..Default::default() }
    }

    #[test]
    fn endpoints() {
        assert_eq!(enumerate_p1(&config(1.0, 0.1)).unwrap(), 1.0);
        assert_eq!(enumerate_p1(&config(0.0, 0.1)).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_weights_without_decay() {
        assert_eq!(enumerate_p1(&config(0.5, 0.0)).unwrap(), 0.5);
    }

    #[test]
    fn zero_tolerance_names_sequence() {
        let c = EnumerationConfig { weights: [0.0, 1.0], tolerance: 0.0, grow_to: None, max_sequence_length: 4, ..Default::default() };
        match enumerate(&c) {
            Err(Error::NeverCrosses { sequence, length, untruncated, total }) => {
                assert_eq!(sequence, "1111");
                assert_eq!((length, untruncated, total), (4, 1, 16));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grows_until_sequences_cross() {
        // 0.1-weight spikes need 10 in a row on the second channel.
        let c = EnumerationConfig { weights: [0.9, 0.1], tolerance: 0.0, max_sequence_length: 3, grow_to: Some(12), ..Default::default() };
        let e = enumerate(&c).unwrap();
        assert_eq!(e.untruncated, 0);
        assert_eq!(e.length, 10);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = config(0.6, 0.1);
        assert_eq!(enumerate_p1(&c).unwrap(), enumerate_p1(&c).unwrap());
    }

    #[test]
    fn classifies_simple_curve() {
        let pts: Vec<CurvePoint> = [(0.0, 0.0), (0.2, 0.3), (0.4, 0.4), (0.6, 0.5), (0.8, 0.9), (1.0, 1.0)]
            .iter()
            .map(|&(w1, p1)| CurvePoint { w1, p1 })
            .collect();
        let c = classify_crossings(&pts);
        let kinds: Vec<_> = c.iter().map(|c| c.classification).collect();
        assert_eq!(
            kinds,
            vec![Classification::Absorbing, Classification::Stable, Classification::Unstable, Classification::Absorbing]
        );
        assert_eq!(c[1].w1, 0.4);
        assert!((c[2].w1 - 0.7).abs() < 1e-12);
    }

    #[test]
    fn two_point_scan_is_endpoints() {
        let s = fixed_point_scan(&config(0.5, 0.0), 2, Execution::Sequential).unwrap();
        assert_eq!(s.crossings.len(), 2);
        assert!(s.crossings.iter().all(|c| c.classification == Classification::Absorbing));
    }

    #[test]
    fn frozen_monte_carlo_symmetry() {
        let w = WeightVector::uniform(2, 1.0).unwrap();
        let c = MonteCarloConfig {
            neuron: NeuronConfig::default(),
            rates: RateSpec::uniform(2, 0.9).unwrap(),
            window: 0.0,
            output_spikes: 20_000,
            event_budget: 10_000_000,
            seed: 11,
        };
        let mc = monte_carlo_p(&w, &c).unwrap();
        assert_eq!(mc.output_spikes, 20_000);
        assert!((mc.p[0] - 0.5).abs() < 4.0 * (0.25f64 / 20_000.0).sqrt());
    }

    #[test]
    fn monte_carlo_without_output() {
        let w = WeightVector::new(vec![0.1, 0.1], 1.0).unwrap();
        let c = MonteCarloConfig {
            neuron: NeuronConfig { threshold: 0.94, decay: 5.0 },
            rates: RateSpec::uniform(2, 0.9).unwrap(),
            window: 0.0,
            output_spikes: 10,
            event_budget: 1000,
            seed: 1,
        };
        assert!(matches!(monte_carlo_p(&w, &c), Err(Error::NoOutput(1000))));
    }
}

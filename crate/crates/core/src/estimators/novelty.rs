use crate::error::{Error, Result};
use crate::plasticity::{PlasticityRule, RuleKind, UpdateEvent, UpdateObserver, WeightVector};

use super::constraints::{
    decay_constraint, hebbian_constraint, kernel_stdp_constraint, stdp_constraint, ConstraintReport,
};
use super::state::{EstimatorState, WindowMode};

const RATE_CAP: f64 = 0.001;

/// Learning rate as a function of the distance from steady state:
/// `min(0.001, exp(−1/(4Δ)))`, with 0 at `Δ = 0`.
pub fn adaptive_epsilon(delta: f64) -> Result<f64> {
    if delta < 0.0 || delta.is_nan() {
        return Err(Error::NegativeDelta(delta));
    }
    if delta == 0.0 {
        return Ok(0.0);
    }
    Ok(RATE_CAP.min((-1.0 / (4.0 * delta)).exp()))
}

/// `Δ` above which [`adaptive_epsilon`] sits at its cap.
pub fn adaptive_crossover() -> f64 {
    1.0 / (4.0 * (1.0 / RATE_CAP).ln())
}

/// Evaluates the constraint matching `rule` on `state`.
///
/// Constant kernels use the mean applied step of the window as `ε`; other
/// kernels go through the channel-specific averages.
pub fn evaluate(state: &EstimatorState, weights: &WeightVector, rule: &PlasticityRule) -> Result<ConstraintReport> {
    let eps = state.mean_epsilon_all();
    match rule.kind {
        RuleKind::PureHebbian if rule.kernel.is_constant() => hebbian_constraint(state, weights, eps),
        RuleKind::Stdp if rule.kernel.is_constant() => stdp_constraint(state, weights, eps),
        RuleKind::PureHebbian | RuleKind::Stdp => kernel_stdp_constraint(state, weights),
        RuleKind::DecayModel { delta } => decay_constraint(state, weights, eps, delta),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonitorConfig {
    /// Window for the running `Δ` estimate.
    pub window: WindowMode,
    /// Minimum number of update events between two `Δ` samples.
    pub every: usize,
    /// Drive the learning rate from `Δ`.
    pub adaptive: bool,
    /// Keep the full report behind every sample.
    pub keep_reports: bool,
    /// Output spikes before this time are left out of the cumulative
    /// statistics.
    pub burn_in: f64,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self { window: WindowMode::default(), every: 500, adaptive: false, keep_reports: false, burn_in: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaSample {
    pub time: f64,
    pub delta: f64,
    /// Learning rate in force after this sample.
    pub epsilon: f64,
}

/// Observer that feeds a cumulative and a windowed [`EstimatorState`] and
/// samples `Δ` from the windowed one at output-spike boundaries.
#[derive(Clone, Debug)]
pub struct Monitor {
    rule: PlasticityRule,
    config: MonitorConfig,
    cumulative: EstimatorState,
    recent: EstimatorState,
    since_sample: usize,
    epsilon: Option<f64>,
    samples: Vec<DeltaSample>,
    reports: Vec<(f64, ConstraintReport)>,
    failed: usize,
    now: f64,
}

impl Monitor {
    pub fn new(rule: PlasticityRule, channels: usize, config: MonitorConfig) -> Result<Self> {
        let l = rule.norm_exponent;
        Ok(Self {
            cumulative: EstimatorState::new(channels, l, WindowMode::Cumulative)?,
            recent: EstimatorState::new(channels, l, config.window)?,
            rule,
            config,
            since_sample: 0,
            epsilon: None,
            samples: Vec::new(),
            reports: Vec::new(),
            failed: 0,
            now: 0.0,
        })
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.config
    }

    pub fn rule(&self) -> &PlasticityRule {
        &self.rule
    }

    /// Statistics since the end of burn-in.
    pub fn cumulative(&self) -> &EstimatorState {
        &self.cumulative
    }

    pub fn recent(&self) -> &EstimatorState {
        &self.recent
    }

    pub fn samples(&self) -> &[DeltaSample] {
        &self.samples
    }

    pub fn reports(&self) -> &[(f64, ConstraintReport)] {
        &self.reports
    }

    /// Samples skipped because the constraint could not be evaluated
    /// (for instance a degenerate STDP denominator).
    pub fn failed_evaluations(&self) -> usize {
        self.failed
    }

    pub fn current_epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(self.rule.kernel.amplitude)
    }

    fn sample(&mut self, time: f64, weights: &WeightVector) {
        match evaluate(&self.recent, weights, &self.rule) {
            Ok(report) => {
                if self.config.adaptive {
                    self.epsilon = adaptive_epsilon(report.delta).ok();
                }
                self.samples.push(DeltaSample { time, delta: report.delta, epsilon: self.current_epsilon() });
                if self.config.keep_reports {
                    self.reports.push((time, report));
                }
            }
            Err(_) => self.failed += 1,
        }
    }
}

impl UpdateObserver for Monitor {
    fn window_opening(&mut self, output_time: f64) {
        self.now = output_time;
    }

    fn observe(&mut self, event: &UpdateEvent, before: &WeightVector) {
        if self.now >= self.config.burn_in {
            self.cumulative.record(event, before);
        }
        self.recent.record(event, before);
        self.since_sample += 1;
    }

    fn window_closed(&mut self, output_time: f64, weights: &WeightVector) {
        if self.since_sample >= self.config.every.max(1) {
            self.since_sample = 0;
            self.sample(output_time, weights);
        }
    }

    fn epsilon_amplitude(&self) -> Option<f64> {
        self.epsilon
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alert {
    pub start: f64,
    pub peak_time: f64,
    pub peak: f64,
    /// Trailing median the excursion was measured against.
    pub baseline: f64,
}

/// Median of a slice; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Excursions of `Δ` above `factor` times the median of the preceding
/// `trailing` samples. Consecutive samples above threshold form one alert,
/// measured against the baseline at its first sample. Samples before
/// `burn_in` neither raise alerts nor start one.
pub fn detect_alerts(samples: &[DeltaSample], factor: f64, trailing: usize, burn_in: f64) -> Vec<Alert> {
    let mut alerts = Vec::new();
    let mut open: Option<Alert> = None;
    for (k, s) in samples.iter().enumerate() {
        if let Some(a) = open.as_mut() {
            if s.delta > factor * a.baseline {
                if s.delta > a.peak {
                    a.peak = s.delta;
                    a.peak_time = s.time;
                }
                continue;
            }
            alerts.push(*a);
            open = None;
        }
        if s.time < burn_in || k < trailing.max(1) {
            continue;
        }
        let history: Vec<f64> = samples[k - trailing.max(1)..k].iter().map(|s| s.delta).collect();
        let baseline = median(&history).unwrap_or(0.0);
        if s.delta > factor * baseline {
            open = Some(Alert { start: s.time, peak_time: s.time, peak: s.delta, baseline });
        }
    }
    alerts.extend(open);
    alerts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rate_limits() {
        assert_eq!(adaptive_epsilon(0.0).unwrap(), 0.0);
        assert!(adaptive_epsilon(1e-4).unwrap() < 1e-300);
        assert_eq!(adaptive_epsilon(10.0).unwrap(), 0.001);
        assert!(matches!(adaptive_epsilon(-0.1), Err(Error::NegativeDelta(_))));
    }

    #[test]
    fn crossover_point() {
        let c = adaptive_crossover();
        assert!((c - 0.0362).abs() < 5e-5);
        assert!(((-1.0 / (4.0 * c)).exp() - 0.001).abs() < 1e-15);
        assert!(adaptive_epsilon(c * 0.99).unwrap() < 0.001);
        assert_eq!(adaptive_epsilon(c * 1.01).unwrap(), 0.001);
    }

    proptest! {
        #[test]
        fn rate_is_monotone(a in 0.0f64..2.0, b in 0.0f64..2.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(adaptive_epsilon(lo).unwrap() <= adaptive_epsilon(hi).unwrap());
        }
    }

    fn series(values: &[f64]) -> Vec<DeltaSample> {
        values
            .iter()
            .enumerate()
            .map(|(k, &d)| DeltaSample { time: k as f64, delta: d, epsilon: 0.0 })
            .collect()
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn single_excursion_is_one_alert() {
        let mut v = vec![0.1; 20];
        v.extend([1.0, 2.0, 0.9]);
        v.extend(vec![0.1; 10]);
        let alerts = detect_alerts(&series(&v), 5.0, 10, 0.0);
        assert_eq!(alerts.len(), 1);
        assert_eq!(alerts[0].start, 20.0);
        assert_eq!(alerts[0].peak, 2.0);
        assert!((alerts[0].baseline - 0.1).abs() < 1e-15);
    }

    #[test]
    fn stationary_series_has_no_alerts() {
        let v: Vec<f64> = (0..200).map(|k| 0.1 + 0.02 * ((k * 7919) % 13) as f64 / 13.0).collect();
        assert!(detect_alerts(&series(&v), 5.0, 20, 10.0).is_empty());
    }

    #[test]
    fn burn_in_suppresses_start() {
        let mut v = vec![5.0; 5];
        v.extend(vec![0.1; 30]);
        assert!(detect_alerts(&series(&v), 5.0, 3, 10.0).is_empty());
    }
}

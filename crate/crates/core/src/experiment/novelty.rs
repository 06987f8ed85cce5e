use crate::estimators::{detect_alerts, median, Alert, DeltaSample};

use super::artifacts::Csv;
use super::config::RunConfig;

/// How `Δ` reacted to one change of the input statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseResponse {
    pub boundary: f64,
    /// Median `Δ` over the second half of the preceding phase.
    pub baseline: f64,
    pub peak: f64,
    pub peak_time: f64,
    /// First time after the peak at which `Δ` fell below twice the
    /// baseline, if that happened before the phase ended.
    pub recovered_at: Option<f64>,
    pub phase_end: f64,
}

impl PhaseResponse {
    pub fn ratio(&self) -> f64 {
        self.peak / self.baseline
    }

    pub fn passed(&self, factor: f64) -> bool {
        self.peak > factor * self.baseline && self.recovered_at.is_some()
    }
}

/// Measures the response to each boundary: the peak within `horizon`
/// after it and the return below twice the preceding baseline.
pub fn phase_responses(samples: &[DeltaSample], boundaries: &[f64], end: f64, horizon: f64) -> Vec<PhaseResponse> {
    let mut out = Vec::new();
    for (k, &b) in boundaries.iter().enumerate() {
        let start = if k == 0 { 0.0 } else { boundaries[k - 1] };
        let phase_end = boundaries.get(k + 1).copied().unwrap_or(end);
        let mid = start + 0.5 * (b - start);
        let before: Vec<f64> = samples.iter().filter(|s| s.time >= mid && s.time < b).map(|s| s.delta).collect();
        let baseline = median(&before).unwrap_or(f64::NAN);
        let mut peak = f64::NEG_INFINITY;
        let mut peak_time = f64::NAN;
        for s in samples.iter().filter(|s| s.time > b && s.time <= b + horizon) {
            if s.delta > peak {
                peak = s.delta;
                peak_time = s.time;
            }
        }
        let recovered_at = samples
            .iter()
            .find(|s| s.time > peak_time && s.time < phase_end && s.delta < 2.0 * baseline)
            .map(|s| s.time);
        out.push(PhaseResponse { boundary: b, baseline, peak, peak_time, recovered_at, phase_end });
    }
    out
}

pub fn alerts(config: &RunConfig, samples: &[DeltaSample]) -> Vec<Alert> {
    detect_alerts(samples, config.novelty_factor, config.novelty_trailing, config.burn_in)
}

pub fn alerts_csv(config: &RunConfig, alerts: &[Alert]) -> Csv {
    let mut csv = Csv::new(config, "start,peak_time,peak,baseline");
    for a in alerts {
        crate::csv_row!(csv; a.start, a.peak_time, a.peak, a.baseline);
    }
    csv
}

pub fn responses_csv(config: &RunConfig, responses: &[PhaseResponse]) -> Csv {
    let mut csv = Csv::new(config, "boundary,baseline,peak,peak_time,ratio,recovered_at,passed");
    for r in responses {
        let rec = r.recovered_at.map_or(String::new(), |t| t.to_string());
        crate::csv_row!(csv; r.boundary, r.baseline, r.peak, r.peak_time, r.ratio(), rec, r.passed(config.novelty_factor));
    }
    csv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(time: f64, delta: f64) -> DeltaSample {
        DeltaSample { time, delta, epsilon: 0.0 }
    }

    #[test]
    fn spike_and_recovery() {
        let mut v: Vec<DeltaSample> = (0..100).map(|k| s(k as f64, 0.01)).collect();
        v.push(s(100.5, 0.2));
        v.extend((101..200).map(|k| s(k as f64, 0.015)));
        let r = phase_responses(&v, &[100.0], 200.0, 10.0);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].baseline, 0.01);
        assert_eq!(r[0].peak, 0.2);
        assert_eq!(r[0].recovered_at, Some(101.0));
        assert!(r[0].passed(5.0));
    }

    #[test]
    fn no_recovery_fails() {
        let mut v: Vec<DeltaSample> = (0..100).map(|k| s(k as f64, 0.01)).collect();
        v.extend((100..200).map(|k| s(k as f64 + 0.5, 0.2)));
        let r = phase_responses(&v, &[100.0], 200.0, 10.0);
        assert_eq!(r[0].recovered_at, None);
        assert!(!r[0].passed(5.0));
    }
}

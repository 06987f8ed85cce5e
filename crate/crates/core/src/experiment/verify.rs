use crate::error::Result;

use super::artifacts::{read_manifest, read_summary, Csv, SummaryRow, SUMMARY};
use super::config::{RuleName, RunConfig};
use super::runner::Outcome;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &'static str, measured: f64, threshold: f64) -> Self {
        Self { name, measured, threshold, passed: measured <= threshold }
    }

    fn at_least(name: &'static str, measured: f64, threshold: f64) -> Self {
        Self { name, measured, threshold, passed: measured >= threshold }
    }
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn max_abs(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    // NaN anywhere must fail the check.
    pairs.map(|(a, b)| (a - b).abs()).fold(0.0, |m, d| if d.is_nan() || m.is_nan() { f64::NAN } else { m.max(d) })
}

/// Steady-state checks for the rule the run was trained with.
pub fn checks(config: &RunConfig, rows: &[SummaryRow]) -> Vec<Check> {
    let tol = config.verify_tolerance;
    match config.rule {
        RuleName::Hebbian => {
            let sum: f64 = rows.iter().map(|r| r.w_final).sum();
            vec![Check::at_most("hebbian.p_equals_w", max_abs(rows.iter().map(|r| (r.p_recent, r.w_final / sum))), tol)]
        }
        RuleName::Stdp => {
            let p: Vec<f64> = rows.iter().map(|r| r.p_hat).collect();
            let pred: Vec<f64> = rows.iter().map(|r| r.p_pred).collect();
            let r = pearson(&pred, &p);
            vec![
                Check::at_most("stdp.max_deviation", max_abs(rows.iter().map(|r| (r.p_pred, r.p_hat))), tol),
                Check::at_least("stdp.pearson", if r.is_nan() { f64::NEG_INFINITY } else { r }, config.verify_pearson),
            ]
        }
        RuleName::Decay => {
            let scale = config.epsilon / config.delta;
            let sum: f64 = rows.iter().map(|r| r.w_final).sum();
            vec![
                Check::at_most("decay.per_channel", max_abs(rows.iter().map(|r| (r.w_mean, scale * r.p_hat))), tol * scale),
                Check::at_most("decay.weight_sum", (sum - scale).abs(), tol * scale),
            ]
        }
    }
}

pub fn verify_outcome(outcome: &Outcome) -> Vec<Check> {
    checks(&outcome.config, &super::artifacts::summarize(outcome))
}

/// Checks a finished run from its manifest and summary.
pub fn verify_dir(dir: &std::path::Path) -> Result<(RunConfig, Vec<Check>)> {
    let config = read_manifest(dir)?;
    let rows = read_summary(&dir.join(SUMMARY))?;
    let checks = checks(&config, &rows);
    Ok((config, checks))
}

pub fn verify_csv(config: &RunConfig, checks: &[Check]) -> Csv {
    let mut csv = Csv::new(config, "check,measured,threshold,passed");
    for c in checks {
        crate::csv_row!(csv; c.name, c.measured, c.threshold, c.passed);
    }
    csv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_of_line() {
        let a = [1.0, 2.0, 3.0];
        assert!((pearson(&a, &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-12);
        assert!((pearson(&a, &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn nan_fails() {
        assert!(max_abs([(0.0, f64::NAN), (0.0, 0.0)].into_iter()).is_nan());
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
    }
}

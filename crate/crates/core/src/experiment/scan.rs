use crate::error::Result;
use crate::exec::Execution;
use crate::oracle::{fixed_point_scan, EnumerationConfig, Scan};

use super::artifacts::Csv;
use super::config::RunConfig;

pub fn enumeration_config(config: &RunConfig, decay: f64) -> EnumerationConfig {
    EnumerationConfig {
        threshold: config.threshold,
        decay,
        max_sequence_length: config.oracle_length,
        rate: config.oracle_rate,
        seed: config.seed,
        tolerance: config.oracle_tolerance,
        ..EnumerationConfig::default()
    }
}

/// One fixed-point scan per configured decay rate, in configured order.
pub fn oracle_scan(config: &RunConfig, exec: Execution) -> Result<Vec<(f64, Scan)>> {
    config.validate()?;
    config
        .oracle_decays
        .iter()
        .map(|&d| Ok((d, fixed_point_scan(&enumeration_config(config, d), config.oracle_resolution, exec)?)))
        .collect()
}

pub fn p_curve_csv(config: &RunConfig, scan: &Scan) -> Csv {
    let mut csv = Csv::new(config, "w1,p1,classification");
    for (p, label) in scan.curve.iter().zip(scan.point_labels()) {
        crate::csv_row!(csv; p.w1, p.p1, label.map_or("", |c| c.as_str()));
    }
    csv
}

pub fn crossings_csv(config: &RunConfig, scan: &Scan) -> Csv {
    let mut csv = Csv::new(config, "w1,p1,classification");
    for c in &scan.crossings {
        crate::csv_row!(csv; c.w1, c.p1, c.classification.as_str());
    }
    csv
}

/// File stem for the decay rate `d`, e.g. `d0.1`.
pub fn decay_tag(d: f64) -> String {
    format!("d{d}")
}
